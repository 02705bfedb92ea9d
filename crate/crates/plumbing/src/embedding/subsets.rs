/// Calls `f` on every connected vertex set that contains `root` and lies in
/// `allowed`, each exactly once (ESU enumeration over bitmasks). Stops early
/// when `f` returns false. Returns the number of sets visited, or `None` once
/// more than `cap` sets have been seen.
pub fn for_each_connected_subset(
    adj: &[u64],
    root: usize,
    allowed: u64,
    cap: usize,
    mut f: impl FnMut(u64) -> bool,
) -> Option<usize> {
    let mut st = State {
        adj,
        allowed,
        cap,
        count: 0,
        stopped: false,
    };
    let r = 1u64 << root;
    if allowed & r == 0 {
        return Some(0);
    }
    let ok = st.extend(r, adj[root] & allowed, r | adj[root], &mut f);
    ok.then_some(st.count)
}

struct State<'a> {
    adj: &'a [u64],
    allowed: u64,
    cap: usize,
    count: usize,
    stopped: bool,
}

impl State<'_> {
    fn extend(&mut self, sub: u64, mut ext: u64, nbhd: u64, f: &mut impl FnMut(u64) -> bool) -> bool {
        self.count += 1;
        if self.count > self.cap {
            return false;
        }
        if !f(sub) {
            self.stopped = true;
            return true;
        }
        while ext != 0 && !self.stopped {
            let w = ext.trailing_zeros() as usize;
            ext &= ext - 1;
            let excl = self.adj[w] & self.allowed & !nbhd;
            if !self.extend(sub | 1 << w, ext | excl, nbhd | self.adj[w], f) {
                return false;
            }
        }
        true
    }
}
