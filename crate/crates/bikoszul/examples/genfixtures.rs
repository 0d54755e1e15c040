//! Regenerates the shipped synthetic structure fixtures under data/.

use bikoszul::field::Field;
use bikoszul::format::write_structure;
use bikoszul::synth::truncated_instance;

fn main() {
    let (s, _) = truncated_instance(Field::Rational, 4, 2);
    let text = write_structure(&s);
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/truncated_d4.ainf");
    std::fs::write(&path, &text).unwrap();
    println!("wrote {} ({} bytes, {} basis elements)", path.display(), text.len(), s.dim());
}
