"""Taylor coefficients of the flows by automatic recurrences.

Each model maps a state vector of Balls to the Taylor coefficients of the
solution through that state, ``x(t) = sum_k c_k t^k``, and optionally to the
coefficients ``V_k`` of the variational matrix ``dx(t)/dx(0)``, obtained
from ``V' = Df(x(t)) V`` with the Jacobian entries expanded as series.

Evaluated on a box, every coefficient encloses the true coefficient for all
states in the box, which is what the validated integrator relies on.
"""
from operator import mul

from flint import arb, arb_mat

__all__ = ["SitnikovModel", "NBodyModel"]

_ZERO = arb(0)


def _conv(a, b, k, lo=0):
    """sum_{j=lo}^{k} a[j] * b[k-j]"""
    return sum(map(mul, a[lo:k + 1], b[k - lo::-1]), _ZERO)


def _power_next(w, u, k, alpha):
    """k-th coefficient of w**alpha given u[0..k-1] (u = w**alpha)."""
    wts = [(k - j) * alpha - j for j in range(k)]
    s = sum(map(mul, map(mul, wts, w[k:0:-1]), u[:k]), _ZERO)
    return s / (k * w[0])


class SitnikovModel:
    """Dynamic part (z, v, E) of the Sitnikov flow; (a, e, mu) are Balls."""

    dim = 3
    names = ("z", "v", "E")
    var_zero = ((2, 0), (2, 1))  # E does not depend on (z, v)

    def __init__(self, a, e, mu):
        self.a, self.e, self.mu = a, e, mu
        self.n = (mu / (4 * a ** 3)).sqrt()

    def rounded(self):
        """Copy whose constants are rounded to the current precision."""
        return SitnikovModel(+self.a, +self.e, +self.mu)

    def coeffs(self, x, N, var=False, V0=None, var_order=None):
        """Coefficients up to order N; with ``var`` also V_0..V_K (K = var_order).

        ``V0`` is the initial variational matrix (identity by default); its
        E row must be (0, 0, *), as it is for every true flow Jacobian.
        """
        a, e, mu, n = self.a, self.e, self.mu, self.n
        K = N if var_order is None else min(var_order, N)
        z, v, E = [x[0]], [x[1]], [x[2]]
        S, C, D, Ed, rho, zz, w2, u, jE = [], [], [], [], [], [], [], [], []
        m32 = -1.5
        if var:
            m52 = -2.5
            u5, zu5, rS, zur, SEd, jzz, jze, jee = [], [], [], [], [], [], [], []
            if V0 is None:
                Vz = [[arb(1), _ZERO, _ZERO]]
                Vv = [[_ZERO, arb(1), _ZERO]]
                VE = [arb(1)]
            else:
                Vz = [[V0[0, j] for j in range(3)]]
                Vv = [[V0[1, j] for j in range(3)]]
                VE = [V0[2, 2]]
        for k in range(N + 1):
            if k == 0:
                s0, c0 = E[0].sin_cos()
                S.append(s0)
                C.append(c0)
                D.append(1 - e * c0)
                Ed.append(n / D[0])
            else:
                jE.append(k * E[k])
                C.append(-sum(map(mul, jE, S[k - 1::-1]), _ZERO) / k)
                S.append(sum(map(mul, jE, C[k - 1::-1]), _ZERO) / k)
                D.append(-e * C[k])
                Ed.append(-_conv(D, Ed, k, 1) / D[0])
            rho.append(a * D[k])
            zz.append(_conv(z, z, k))
            w2.append(zz[k] + _conv(rho, rho, k))
            if k == 0:
                u.append(1 / (w2[0] * w2[0].sqrt()))
            else:
                u.append(_power_next(w2, u, k, m32))
            acc = -2 * mu * _conv(z, u, k)
            if var and k < K:
                if k == 0:
                    u5.append(u[0] / w2[0])
                else:
                    u5.append(_power_next(w2, u5, k, m52))
                zu5.append(_conv(z, u5, k))
                rS.append(_conv(rho, S, k))
                zur.append(_conv(zu5, rS, k))
                SEd.append(_conv(S, Ed, k))
                # dv'/dz = -2 mu (u - 3 z^2 u5); dv'/dE = 6 mu a e z u5 rho sin E
                jzz.append(-2 * mu * (u[k] - 3 * _conv(zz, u5, k)))
                jze.append(6 * mu * a * e * zur[k])
                # dE'/dE = -n e sin E / D^2 = -e (sin E * E') / D
                jee_k = -e * SEd[k]
                if k:
                    jee_k -= _conv(D, jee, k, 1)
                jee.append(jee_k / D[0])
            z.append(v[k] / (k + 1))
            v.append(acc / (k + 1))
            E.append(Ed[k] / (k + 1))
            if var and k < K:
                Vz.append([q / (k + 1) for q in Vv[k]])
                row = []
                for col in range(3):
                    t = sum((jzz[j] * Vz[k - j][col] for j in range(k + 1)), _ZERO)
                    if col == 2:
                        t += sum((jze[j] * VE[k - j] for j in range(k + 1)), _ZERO)
                    row.append(t / (k + 1))
                Vv.append(row)
                VE.append(_conv(jee, VE, k) / (k + 1))
        c = [z[:N + 1], v[:N + 1], E[:N + 1]]
        if not var:
            return c
        V = [arb_mat([Vz[k], Vv[k], [_ZERO, _ZERO, VE[k]]]) for k in range(K + 1)]
        return c, V


class NBodyModel:
    """Three point masses; state = 9 positions then 9 velocities."""

    dim = 18
    var_zero = ()
    names = tuple(f"p{i}{c}" for i in (1, 2, 3) for c in "xyz") + \
        tuple(f"v{i}{c}" for i in (1, 2, 3) for c in "xyz")
    pairs = ((0, 1), (0, 2), (1, 2))

    def __init__(self, masses):
        self.masses = list(masses)

    def rounded(self):
        return NBodyModel([+m for m in self.masses])

    def coeffs(self, x, N, var=False, V0=None, var_order=None):
        """As SitnikovModel.coeffs; V0 is 18x18 (identity by default)."""
        m = self.masses
        K = N if var_order is None else min(var_order, N)
        P = [[x[i]] for i in range(9)]
        W = [[x[9 + i]] for i in range(9)]
        # per pair: d (3 series), r2, r^-3, and for var r^-5 and d_a d_b
        d = {pr: [[], [], []] for pr in self.pairs}
        r2 = {pr: [] for pr in self.pairs}
        r3 = {pr: [] for pr in self.pairs}
        active = [pr for pr in self.pairs if not (m[pr[0]].is_zero() and m[pr[1]].is_zero())]
        m32 = -1.5
        if var:
            m52 = -2.5
            r5 = {pr: [] for pr in self.pairs}
            dd = {pr: {(p_, q_): [] for p_ in range(3) for q_ in range(p_, 3)} for pr in self.pairs}
            ddr5 = {pr: {key: [] for key in dd[pr]} for pr in self.pairs}
            Gs = []
            if V0 is None:
                V0 = [[arb(1) if i == j else _ZERO for j in range(18)] for i in range(18)]
            else:
                V0 = V0.tolist()
            Vp = [arb_mat(V0[:9])]
            Vw = [arb_mat(V0[9:])]
        for k in range(N + 1):
            acc = [_ZERO] * 9
            if var and k < K:
                G = [[_ZERO] * 9 for _ in range(9)]
            for pr in active:
                i, j = pr
                dp = d[pr]
                for c in range(3):
                    dp[c].append(P[3 * j + c][k] - P[3 * i + c][k])
                r2[pr].append(sum((_conv(dp[c], dp[c], k) for c in range(3)), _ZERO))
                if k == 0:
                    r3[pr].append(1 / (r2[pr][0] * r2[pr][0].sqrt()))
                else:
                    r3[pr].append(_power_next(r2[pr], r3[pr], k, m32))
                for c in range(3):
                    f = _conv(dp[c], r3[pr], k)
                    acc[3 * i + c] += m[j] * f
                    acc[3 * j + c] -= m[i] * f
                if var and k < K:
                    if k == 0:
                        r5[pr].append(r3[pr][0] / r2[pr][0])
                    else:
                        r5[pr].append(_power_next(r2[pr], r5[pr], k, m52))
                    for key in dd[pr]:
                        dd[pr][key].append(_conv(dp[key[0]], dp[key[1]], k))
                        ddr5[pr][key].append(_conv(dd[pr][key], r5[pr], k))
                    # K = I r^-3 - 3 d d^T r^-5 ; acc_i += m_j K (p_j - p_i)
                    for a_ in range(3):
                        for b_ in range(3):
                            key = (a_, b_) if a_ <= b_ else (b_, a_)
                            kk = -3 * ddr5[pr][key][k]
                            if a_ == b_:
                                kk += r3[pr][k]
                            ia, ib = 3 * i + a_, 3 * i + b_
                            ja, jb = 3 * j + a_, 3 * j + b_
                            G[ia][jb] += m[j] * kk
                            G[ia][ib] -= m[j] * kk
                            G[ja][ib] += m[i] * kk
                            G[ja][jb] -= m[i] * kk
            for c in range(9):
                P[c].append(W[c][k] / (k + 1))
                W[c].append(acc[c] / (k + 1))
            if var and k < K:
                Gs.append(arb_mat(G))
                Vp.append(Vw[k] * (arb(1) / (k + 1)))
                tot = Gs[0] * Vp[k]
                for jj in range(1, k + 1):
                    tot = tot + Gs[jj] * Vp[k - jj]
                Vw.append(tot * (arb(1) / (k + 1)))
        c = [P[i][:N + 1] for i in range(9)] + [W[i][:N + 1] for i in range(9)]
        if not var:
            return c
        V = []
        for k in range(K + 1):
            rows = Vp[k].tolist() + Vw[k].tolist()
            V.append(arb_mat(rows))
        return c, V
