"""Taylor coefficient recurrences against independent high-precision ODE solutions."""
from fractions import Fraction

import pytest
from flint import arb, arb_mat, ctx

from sitnikov.ball import to_ball
from sitnikov.dynamics import SitnikovState, embed_three_body, nbody_rhs, sitnikov_rhs
from sitnikov.taylor import NBodyModel, SitnikovModel

# solution of (z, v, E)' = f at h = 0.1 from (0.1, 1.2, 0.7), a = mu = 1, e = 0.3
# (mpmath odefun, 40 digits)
FLOW_REF = ["0.2171600144865453142098273160244909",
            "1.1368288382294198627463516124481941",
            "0.76435648407954335246973762995474425"]
# d(flow)/d(initial) by forward differences of the same solver (step 1e-15)
JAC_REF = [[0.9815474429725, 0.099414929994168, 0.0020897726925327],
           [-0.34915255099859, 0.98343593118833, 0.046225102977451],
           [0.0, 0.0, 0.98352891800929]]


def _model():
    with ctx.workprec(128):
        return SitnikovModel(arb(1), to_ball(Fraction(3, 10)), arb(1))


def _x0():
    with ctx.workprec(128):
        return [to_ball(Fraction(1, 10)), to_ball(Fraction(6, 5)), to_ball(Fraction(7, 10))]


def test_series_sum_matches_flow():
    with ctx.workprec(128):
        c = _model().coeffs(_x0(), 50)
        h = to_ball(Fraction(1, 10))
        for comp, ref in zip(c, FLOW_REF):
            s = sum((comp[k] * h ** k for k in range(len(comp))), arb(0))
            assert abs(s - arb(ref)) < 1e-33


def test_first_coefficients_are_the_vector_field():
    with ctx.workprec(128):
        x = _x0()
        c = _model().coeffs(x, 3)
        st = SitnikovState(1, Fraction(3, 10), 1, Fraction(1, 10), Fraction(6, 5), Fraction(7, 10))
        f = sitnikov_rhs(st, prec=128)
        for i in range(3):
            assert c[i][1].overlaps(f[3 + i])


def test_variational_sum_matches_finite_differences():
    with ctx.workprec(128):
        _, V = _model().coeffs(_x0(), 34, var=True)
        h = to_ball(Fraction(1, 10))
        S = sum((V[k] * h ** k for k in range(len(V))), arb_mat(3, 3))
        for i in range(3):
            for j in range(3):
                assert abs(float(S[i, j].mid()) - JAC_REF[i][j]) < 1e-12


def test_variational_truncation_and_initial_matrix():
    with ctx.workprec(128):
        m = _model()
        _, Vfull = m.coeffs(_x0(), 20, var=True)
        c, Vk = m.coeffs(_x0(), 20, var=True, var_order=5)
        assert len(Vk) == 6 and len(c[0]) == 21
        for k in range(6):
            for i in range(3):
                for j in range(3):
                    assert Vk[k][i, j].overlaps(Vfull[k][i, j])
        # linearity in the initial matrix
        W = arb_mat([[2, 1, 0], [0, 3, 1], [0, 0, 5]])
        _, VW = m.coeffs(_x0(), 6, var=True, V0=W)
        for k in range(7):
            prod = Vfull[k] * W
            for i in range(3):
                for j in range(3):
                    assert VW[k][i, j].overlaps(prod[i, j])


def test_box_coefficients_enclose_point_coefficients():
    with ctx.workprec(64):
        m = _model()
        box = [arb("0.1", 1e-3), arb("1.2", 1e-3), arb("0.7", 1e-3)]
        cb = m.coeffs(box, 12)
        for dz in (-1e-3, 0, 1e-3):
            pt = [arb(0.1 + dz), arb(1.2 - dz), arb(0.7 + dz)]
            cp = m.coeffs(pt, 12)
            for i in range(3):
                for k in range(13):
                    assert cb[i][k].overlaps(cp[i][k])


def _three_body_vector():
    st = SitnikovState(1, Fraction(3, 10), 1, Fraction(1, 10), Fraction(6, 5), Fraction(7, 10))
    s = embed_three_body(st, st, prec=128)
    with ctx.workprec(128):
        return s, [+b for b in s.vector()]


def test_nbody_first_coefficients():
    s, vec = _three_body_vector()
    with ctx.workprec(128):
        c = NBodyModel(vec[:3]).coeffs(vec[3:], 4)
        f = nbody_rhs(s, prec=128)
        for i in range(18):
            assert c[i][1].overlaps(f[i])


def test_nbody_reproduces_sitnikov_axis_motion():
    s, vec = _three_body_vector()
    with ctx.workprec(128):
        c3 = NBodyModel(vec[:3]).coeffs(vec[3:], 25)
        cs = _model().coeffs(_x0(), 25)
        for k in range(26):
            assert c3[8][k].overlaps(cs[0][k])      # z of the third body
            assert c3[17][k].overlaps(cs[1][k])     # its velocity
            assert c3[6][k].contains(0) and c3[7][k].contains(0)


def test_nbody_variational_is_derivative():
    s, vec = _three_body_vector()
    with ctx.workprec(128):
        model = NBodyModel(vec[:3])
        y = vec[3:]
        h = to_ball(Fraction(1, 20))
        c, V = model.coeffs(y, 30, var=True)
        S = sum((V[k] * h ** k for k in range(len(V))), arb_mat(18, 18))
        d = arb(2) ** -40

        def flow(yy):
            cc = model.coeffs(yy, 30)
            return [sum((cc[i][k] * h ** k for k in range(31)), arb(0)) for i in range(18)]

        base = flow(y)
        for j in (0, 4, 8, 9, 13, 17):
            yy = list(y)
            yy[j] = yy[j] + d
            pert = flow(yy)
            for i in range(18):
                fd = float(((pert[i] - base[i]) / d).mid())
                assert abs(fd - float(S[i, j].mid())) < 1e-9


@pytest.mark.parametrize("model", ["sitnikov", "nbody"])
def test_names_and_dims(model):
    m = _model() if model == "sitnikov" else NBodyModel([arb(1), arb(1), arb(0)])
    assert len(m.names) == m.dim
