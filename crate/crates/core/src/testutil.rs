/// All permutations of `0..n`, by recursive insertion. Independent of the
/// oracle's lexicographic stepping.
pub fn permutations(n: usize) -> impl Iterator<Item = Vec<usize>> {
    fn build(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in build(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }
    build(n).into_iter()
}
