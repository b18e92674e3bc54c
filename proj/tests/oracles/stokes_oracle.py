"""Independent scipy re-implementation of the rough-forcing pipeline.

Builds the staggered operators from scratch (interior unknowns only, zero
boundary data), solves the saddle problem with a zero-mean Lagrange multiplier
instead of pinning, and iterates to the nonlinear fixed point with a fixed
damping. Prints the baselines used by the experiments tests.
"""
import sys
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

MU, NU0, NU1, P = 1.0, 1.0, 1.0, 1.5


def carreau_factor(lam, p=P):
    s = MU + (NU0 + NU1 * lam * lam) ** ((p - 2) / 2)
    return np.where(lam > 0, s, 0.0)


class Grid:
    def __init__(self, n):
        self.n = n
        self.h = 1.0 / n
        n1 = n + 1
        self.iu = {}
        k = 0
        for j in range(n):
            for i in range(1, n):
                self.iu[(i, j)] = k
                k += 1
        self.nu = k
        self.iv = {}
        for j in range(1, n):
            for i in range(n):
                self.iv[(i, j)] = k
                k += 1
        self.nvel = k
        self.ncell = n * n
        self.nnode = n1 * n1
        self.build()

    def xx(self, i, j):
        return j * self.n + i

    def yy(self, i, j):
        return self.ncell + j * self.n + i

    def xy(self, i, j):
        return 2 * self.ncell + j * (self.n + 1) + i

    def yx(self, i, j):
        return 2 * self.ncell + self.nnode + j * (self.n + 1) + i

    def build(self):
        n, h = self.n, self.h
        rows, cols, vals = [], [], []

        def add(r, key, table, c):
            if key in table:
                rows.append(r)
                cols.append(table[key])
                vals.append(c)

        for j in range(n):
            for i in range(n):
                add(self.xx(i, j), (i + 1, j), self.iu, 1 / h)
                add(self.xx(i, j), (i, j), self.iu, -1 / h)
                add(self.yy(i, j), (i, j + 1), self.iv, 1 / h)
                add(self.yy(i, j), (i, j), self.iv, -1 / h)
        for j in range(n + 1):
            for i in range(n + 1):
                if j == 0:
                    add(self.xy(i, j), (i, 0), self.iu, 2 / h)
                elif j == n:
                    add(self.xy(i, j), (i, n - 1), self.iu, -2 / h)
                else:
                    add(self.xy(i, j), (i, j), self.iu, 1 / h)
                    add(self.xy(i, j), (i, j - 1), self.iu, -1 / h)
                if i == 0:
                    add(self.yx(i, j), (0, j), self.iv, 2 / h)
                elif i == n:
                    add(self.yx(i, j), (n - 1, j), self.iv, -2 / h)
                else:
                    add(self.yx(i, j), (i, j), self.iv, 1 / h)
                    add(self.yx(i, j), (i - 1, j), self.iv, -1 / h)
        nt = 2 * self.ncell + 2 * self.nnode
        self.nt = nt
        self.G = sp.csr_matrix((vals, (rows, cols)), shape=(nt, self.nvel))
        w = np.full(nt, h * h)
        for j in range(n + 1):
            for i in range(n + 1):
                edge = (i in (0, n)) + (j in (0, n))
                wt = h * h / (2 ** edge)
                w[self.xy(i, j)] = wt
                w[self.yx(i, j)] = wt
        self.W = w
        # divergence of interior velocities at cells
        D = self.G[: self.ncell] + self.G[self.ncell: 2 * self.ncell]
        self.D = sp.csr_matrix(D)
        # |E_c|^2 = sum_k Pm[c,k] E_k^2
        pr, pc, pv = [], [], []
        for j in range(n):
            for i in range(n):
                c = j * n + i
                pr += [c, c]
                pc += [self.xx(i, j), self.yy(i, j)]
                pv += [1.0, 1.0]
                for a, b in ((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)):
                    pr += [c, c]
                    pc += [self.xy(a, b), self.yx(a, b)]
                    pv += [0.25, 0.25]
        self.Pm = sp.csr_matrix((pv, (pr, pc)), shape=(self.ncell, nt))
        sym = sp.lil_matrix((nt, nt))
        for k in range(2 * self.ncell):
            sym[k, k] = 1.0
        for k in range(self.nnode):
            a, b = 2 * self.ncell + k, 2 * self.ncell + self.nnode + k
            sym[a, a] = sym[a, b] = sym[b, a] = sym[b, b] = 0.5
        self.S = sp.csr_matrix(sym)

    def magnitude(self, E):
        return np.sqrt(self.Pm @ (E * E))

    def node_magnitude(self, E):
        n = self.n
        out = np.zeros(self.nnode)
        for j in range(n + 1):
            for i in range(n + 1):
                acc, cnt = 0.0, 0
                for b in (j - 1, j):
                    for a in (i - 1, i):
                        if 0 <= a < n and 0 <= b < n:
                            acc += E[self.xx(a, b)] ** 2 + E[self.yy(a, b)] ** 2
                            cnt += 1
                out[j * (n + 1) + i] = np.sqrt(E[self.xy(i, j)] ** 2 + E[self.yx(i, j)] ** 2 + acc / cnt)
        return out

    def stress(self, E, factor):
        # W^{-1} d/dE sum_c h^2 Phi(|E_c|), Phi'(l) = s(l) l
        s = factor(self.magnitude(E))
        return (self.Pm.T @ (self.h ** 2 * s)) * E / self.W


def dirac(g, cx=0.5, cy=0.5, amp=1.0):
    h, n = g.h, g.n
    Gu = g.G[:, : g.nu]
    L = (Gu.T @ sp.diags(g.W) @ Gu).tocsc()
    fi, fj = cx / h, cy / h - 0.5
    i0, j0 = int(np.floor(fi)), int(np.floor(fj))
    tx, ty = fi - i0, fj - j0
    rhs = np.zeros(g.nu)
    for a in (0, 1):
        for b in (0, 1):
            m = (tx if a else 1 - tx) * (ty if b else 1 - ty)
            if m:
                i = min(max(i0 + a, 1), n - 1)
                j = min(max(j0 + b, 0), n - 1)
                rhs[g.iu[(i, j)]] += amp * m
    green = spla.spsolve(L, rhs)
    full = np.zeros(g.nvel)
    full[: g.nu] = green
    return g.G @ full


def maximal(f):
    n = f.shape[0]
    c = np.zeros((n + 1, n + 1))
    c[1:, 1:] = np.cumsum(np.cumsum(np.abs(f), 0), 1)
    best = np.abs(f).copy()
    idx = np.arange(n)
    for r in range(1, n + 1):
        lo = np.clip(idx - r, 0, n)
        hi = np.clip(idx + r + 1, 0, n)
        s = c[np.ix_(hi, hi)] - c[np.ix_(lo, hi)] - c[np.ix_(hi, lo)] + c[np.ix_(lo, lo)]
        best = np.maximum(best, s / (2 * r + 1) ** 2)
    return best


def a2_clip(w):
    n = w.shape[0]
    cw = np.zeros((n + 1, n + 1))
    cd = np.zeros((n + 1, n + 1))
    cw[1:, 1:] = np.cumsum(np.cumsum(w, 0), 1)
    cd[1:, 1:] = np.cumsum(np.cumsum(1 / w, 0), 1)
    worst = 1.0
    r = 1
    while True:
        centers = np.arange(0, n, r)
        lo = np.clip(centers - r, 0, n)
        hi = np.clip(centers + r + 1, 0, n)
        cnt = np.outer(hi - lo, hi - lo)

        def box(c):
            return c[np.ix_(hi, hi)] - c[np.ix_(lo, hi)] - c[np.ix_(hi, lo)] + c[np.ix_(lo, lo)]

        worst = max(worst, np.max(box(cw) / cnt * box(cd) / cnt))
        if r >= n:
            break
        r *= 2
    return worst


def cells(g, x):
    # cell-indexed vector -> [j, i] array
    return x.reshape(g.n, g.n)


def lq(g, mag, w, q):
    return (np.sum(np.abs(mag) ** q * w) * g.h ** 2) ** (1 / q)


class Saddle:
    def __init__(self, g, mu):
        self.g = g
        A = g.G.T @ sp.diags(g.W) @ g.S @ g.G
        B = g.h ** 2 * g.D
        ones = sp.csr_matrix(np.ones((1, g.ncell)))
        K = sp.bmat([[mu * A, -B.T, None], [-B, None, ones.T], [None, ones, None]], format="csc")
        self.lu = spla.splu(K)
        self.mu = mu

    def solve(self, F):
        g = self.g
        rhs = np.concatenate([g.G.T @ (g.W * F), np.zeros(g.ncell + 1)])
        x = self.lu.solve(rhs)
        return x[: g.nvel], x[g.nvel: g.nvel + g.ncell]


def solve_nonlinear(g, f, factor, mu_inf, theta=0.5, tol=1e-12, saddle=None, v0=None):
    saddle = saddle or Saddle(g, mu_inf)
    v = np.zeros(g.nvel) if v0 is None else v0.copy()
    p = np.zeros(g.ncell)
    for it in range(500):
        E = g.S @ (g.G @ v)
        Feff = f + mu_inf * E - g.stress(E, factor)
        vn, p = saddle.solve(Feff)
        upd = np.linalg.norm(vn - v)
        v = theta * vn + (1 - theta) * v
        if upd <= tol * max(np.linalg.norm(vn), 1e-300):
            return v, p, it + 1
    raise RuntimeError("oracle Picard did not converge")


def omega0(g, f, s0):
    M = maximal(cells(g, g.magnitude(f)))
    return (1 + M) ** (s0 - 2)


def ratio(g, v, p, f, w, q=2.0):
    num = lq(g, g.magnitude(g.G @ v), w.ravel(), q) + lq(g, p, w.ravel(), q)
    return num / (1 + lq(g, g.magnitude(f), w.ravel(), q)), num


def truncate(g, f, k):
    out = f.copy()
    cm = g.magnitude(f)
    nm = g.node_magnitude(f)
    out[: g.ncell][cm >= k] = 0
    out[g.ncell: 2 * g.ncell][cm >= k] = 0
    off = 2 * g.ncell
    out[off: off + g.nnode][nm >= k] = 0
    out[off + g.nnode:][nm >= k] = 0
    return out


def main():
    s0 = 1.5
    what = sys.argv[1:] or ["a2", "truncation", "roughness", "linear"]
    if "a2" in what:
        for n in (64, 128, 256):
            g = Grid(n)
            f = dirac(g)
            print(f"a2 n={n} A2_clip={a2_clip(omega0(g, f, s0))!r} max|f|={g.magnitude(f).max()!r}")
    if "truncation" in what:
        g = Grid(64)
        f = dirac(g)
        w = omega0(g, f, s0)
        sad = Saddle(g, MU)
        prev = None
        for e in range(7):
            k = 2.0 ** e
            fk = truncate(g, f, k)
            v, p, it = solve_nonlinear(g, fk, carreau_factor, MU, saddle=sad)
            r, _ = ratio(g, v, p, fk, w)
            gap = lq(g, g.magnitude(fk - f), w.ravel(), 2.0)
            cauchy = lq(g, g.magnitude(g.G @ (v - prev)), 1.0, s0) if prev is not None else float("nan")
            print(f"trunc k={k:g} ratio={r!r} gap={gap!r} cauchy_prev={cauchy!r} it={it}")
            prev = v
    if "roughness" in what:
        for n in (16, 32, 64, 128):
            g = Grid(n)
            f = dirac(g)
            w = omega0(g, f, s0)
            v, p, it = solve_nonlinear(g, f, carreau_factor, MU)
            ru, num = ratio(g, v, p, f, np.ones_like(w))
            rw, _ = ratio(g, v, p, f, w)
            print(f"rough n={n} unweighted_num={num!r} unweighted_ratio={ru!r} weighted_ratio={rw!r} it={it}")
    if "linear" in what:
        for n in (16, 32, 64, 128):
            g = Grid(n)
            f = dirac(g)
            w = omega0(g, f, s0)
            v, p = Saddle(g, 1.0).solve(f)
            ru, num = ratio(g, v, p, f, np.ones_like(w))
            rw, _ = ratio(g, v, p, f, w)
            print(f"linear n={n} unweighted_num={num!r} weighted_ratio={rw!r}")


if __name__ == "__main__":
    main()
