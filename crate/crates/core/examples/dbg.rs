fn main() {
    let pres = loopsolve_core::presentation::parse_presentation("presentation cptwo\ngenerator y 2\nrelation y^3\n").unwrap();
    match loopsolve_core::resolution::build_resolution(&pres, 10, &loopsolve_core::resolution::BuildOptions::default()) {
        Ok(r) => println!("ok, {} gens", r.gens.len()),
        Err(e) => println!("ERR: {e}"),
    }
    let pres2 = loopsolve_core::presentation::parse_presentation("presentation tor\ngenerator y 4 order 3\n").unwrap();
    match loopsolve_core::resolution::build_resolution(&pres2, 12, &loopsolve_core::resolution::BuildOptions::default()) {
        Ok(r) => println!("ok2, {} gens", r.gens.len()),
        Err(e) => println!("ERR2: {e}"),
    }
}
