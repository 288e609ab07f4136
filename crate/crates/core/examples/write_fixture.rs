//! Writes a synthetic fixture: `write_fixture <dir> [n_images] [size] [seed]`.
fn main() {
    let args: Vec<String> = std::env::args().collect();
    let dir = args.get(1).expect("usage: write_fixture <dir> [n_images] [size] [seed]");
    let n = args.get(2).map_or(10, |s| s.parse().expect("n_images"));
    let size = args.get(3).map_or(1024, |s| s.parse().expect("size"));
    let seed = args.get(4).map_or(7, |s| s.parse().expect("seed"));
    let paths = contour_bench::synth::write_fixture(dir, n, size, seed).expect("fixture");
    println!("images:  {}", paths.images_dir.display());
    println!("masks:   {}", paths.masks_dir.display());
    println!("classes: {}", paths.classes_path.display());
}
