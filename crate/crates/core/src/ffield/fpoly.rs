//! Small dense polynomial helpers over `F_p`, used only to pick moduli.

type P = Vec<u64>;

fn trim(mut a: P) -> P {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut r, mut b, mut e) = (1u64, a % p, p - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn rem(a: &[u64], m: &[u64], p: u64) -> P {
    let mut r = trim(a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while r.len() > dm {
        let top = r.len() - 1;
        let c = r[top] * lead_inv % p;
        for (j, &mj) in m.iter().enumerate() {
            let idx = top - dm + j;
            r[idx] = (r[idx] + p - c * mj % p) % p;
        }
        r = trim(r);
    }
    r
}

fn mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> P {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    rem(&out, m, p)
}

fn pow_mod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> P {
    let mut acc = vec![1u64];
    let mut b = rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(&acc, &b, m, p);
        }
        e >>= 1;
        if e > 0 {
            b = mul_mod(&b, &b, m, p);
        }
    }
    acc
}

fn gcd(a: &[u64], b: &[u64], p: u64) -> P {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Irreducibility of a monic `f` of degree `k`: `gcd(f, X^{p^i} - X) = 1`
/// for `1 <= i <= k/2`.
pub(super) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let k = f.len() - 1;
    if k <= 1 {
        return k == 1;
    }
    let mut xp = vec![0, 1];
    for _ in 1..=k / 2 {
        xp = pow_mod(&xp, p, f, p);
        let mut diff = xp.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        let g = gcd(f, &diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Lexicographically least monic irreducible of degree `k >= 2`, comparing
/// coefficients from `T^{k-1}` down to the constant term.
pub(super) fn least_irreducible(p: u64, k: usize) -> Vec<u64> {
    let mut low = vec![0u64; k];
    loop {
        if low[0] != 0 {
            let mut f = low.clone();
            f.push(1);
            if is_irreducible(&f, p) {
                return f;
            }
        }
        // increment, constant term least significant
        let mut i = 0;
        loop {
            low[i] += 1;
            if low[i] < p {
                break;
            }
            low[i] = 0;
            i += 1;
            assert!(i < k, "irreducible polynomials exist in every degree");
        }
    }
}
