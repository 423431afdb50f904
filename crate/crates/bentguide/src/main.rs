fn main() {
    println!("bentguide CLI: under construction");
}
