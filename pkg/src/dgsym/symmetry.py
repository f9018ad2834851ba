"""Symmetry generators, the commutator table, and the determining equations.

Generators are built per parameter point (their coefficients carry nu and mu
values) as exact :class:`~dgsym.symexpr.VectorFieldSpec` objects.  Whether a
named generator actually generates a symmetry at a point is decided by the
subfamily predicates of :mod:`dgsym.params`, and can be re-derived from
scratch here: :func:`determining_residuals` substitutes a candidate field into
the full set of determining equations and returns each residual in normal
form, so a field is a symmetry generator iff every residual is zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .params import DGParams, classify, predicate_report
from .symexpr import SymExpr, VectorFieldSpec, lie_bracket, parse_poly

__all__ = [
    "GeneratorName", "parse_generator", "basis_generator", "is_admissible",
    "admissible_generators", "exp_rate_coefficients", "infsub_poly_generator",
    "verify_commutator_table", "verify_infinite_relations",
    "determining_residuals", "residuals_all_zero",
    "GeneratorNotAdmissible", "CheckRow",
]


class GeneratorNotAdmissible(ValueError):
    """Requested generator does not generate a symmetry at this point."""


@dataclass(frozen=True)
class GeneratorName:
    """Parsed generator name: kind plus optional indices or polynomial payload."""

    kind: str
    i: int = 0
    j: int = 0
    poly: tuple = ()

    def __str__(self):
        if self.kind == "L":
            return f"L:{self.i},{self.j}"
        if self.kind in ("P", "B"):
            return f"{self.kind}:{self.i}"
        if self.kind == "Yf":
            return "Yf:" + "+".join(f"({c})*z^{k}" for k, c in enumerate(self.poly) if c)
        return self.kind


_SIMPLE_KINDS = ("H", "D", "C", "E", "R", "A", "F", "Zheat", "Zse")


def parse_generator(text) -> GeneratorName:
    """Accepts "H", "L:1,2", "P:1", "B:2", "Yf:1+z^2", "F", ... ."""
    if isinstance(text, GeneratorName):
        return text
    text = text.strip()
    if ":" in text:
        head, payload = text.split(":", 1)
        head = head.strip()
        if head == "L":
            i, j = (int(v) for v in payload.split(","))
            return GeneratorName(kind="L", i=i, j=j)
        if head in ("P", "B"):
            return GeneratorName(kind=head, i=int(payload))
        if head == "Yf":
            return GeneratorName(kind="Yf", poly=parse_poly(payload))
        raise ValueError(f"unknown generator {text!r}")
    if text in _SIMPLE_KINDS:
        return GeneratorName(kind=text)
    raise ValueError(f"unknown generator {text!r}")


def exp_rate_coefficients(p: DGParams) -> tuple:
    """Exact (lambda, eta, kappa) of the exponential generator F.

    lambda = 2(mu3+nu1)/(mu1-2nu2) and eta = (mu1/nu1) lambda - (mu3+2nu1)/nu1.
    kappa is fixed by the determining equations to
    (mu3+2nu1)/(nu1 lambda) + 2nu2/nu1; with this value lambda*kappa - eta = 2
    identically, which is what makes the closed-form flow of F consistent.
    """
    if p.mu1 - 2 * p.nu2 == 0 or p.mu3 + p.nu1 == 0:
        raise GeneratorNotAdmissible(
            "F needs mu1 != 2 nu2 and mu3 != -nu1 for its exponent rates")
    lam = 2 * (p.mu3 + p.nu1) / (p.mu1 - 2 * p.nu2)
    eta = p.mu1 / p.nu1 * lam - (p.mu3 + 2 * p.nu1) / p.nu1
    kappa = (p.mu3 + 2 * p.nu1) / (p.nu1 * lam) + 2 * p.nu2 / p.nu1
    return lam, eta, kappa


def _admissibility(name: GeneratorName, p: DGParams) -> bool:
    report = predicate_report(p)
    kind = name.kind
    if kind in ("H", "P", "L", "D", "E", "R"):
        return True
    if kind in ("C", "B"):
        return report["GalSub"]
    if kind == "A":
        return report["FinSub"]
    if kind == "F":
        return report["ExpSub"]
    if kind == "Yf":
        return report["InfSub"]
    if kind == "Zheat":
        return classify(p).tag == "Sym1b"
    if kind == "Zse":
        return classify(p).tag == "Sym1c"
    raise ValueError(f"unknown generator kind {kind!r}")


def is_admissible(name, p: DGParams) -> bool:
    return _admissibility(parse_generator(name), p)


def admissible_generators(p: DGParams) -> list:
    """Names of the basis generators admissible at p (indices expanded)."""
    n = p.n
    names = ["H", "D", "E", "R"]
    names += [f"P:{j}" for j in range(1, n + 1)]
    names += [f"L:{j},{k}" for j in range(1, n + 1) for k in range(j + 1, n + 1)]
    report = predicate_report(p)
    if report["GalSub"]:
        names.append("C")
        names += [f"B:{j}" for j in range(1, n + 1)]
    if report["FinSub"]:
        names.append("A")
    if report["ExpSub"]:
        names.append("F")
    tag = classify(p).tag
    if tag == "Sym1b":
        names.append("Zheat")
    if tag == "Sym1c":
        names.append("Zse")
    return names


def infsub_poly_generator(p: DGParams, coeffs) -> VectorFieldSpec:
    """Y_f with polynomial f: f(mu1 r + nu1 s) (d/dr - (2 nu2/nu1) d/ds)."""
    n = p.n
    z = p.mu1 * SymExpr.var(n, "r") + p.nu1 * SymExpr.var(n, "s")
    f = SymExpr.zero(n)
    for k, c in enumerate(coeffs):
        if c:
            f = f + Fraction(c) * z ** k
    zero = SymExpr.zero(n)
    return VectorFieldSpec(n=n, xi=(zero,) * n, tau=zero, phi=f,
                           sigma=-(2 * p.nu2 / p.nu1) * f)


def basis_generator(name, p: DGParams, require_admissible: bool = True) -> VectorFieldSpec:
    """Exact vector field of a named basis generator at parameter point p.

    With ``require_admissible`` the subfamily predicates gate construction;
    pass False to build the field anyway, e.g. to inspect its nonzero
    determining residuals outside its subfamily.
    """
    name = parse_generator(name)
    if require_admissible and not _admissibility(name, p):
        raise GeneratorNotAdmissible(
            f"{name} is not a symmetry generator at a {classify(p).tag} point")

    n = p.n
    zero = SymExpr.zero(n)
    kind = name.kind

    def xvar(j):
        return SymExpr.var(n, f"x{j}")

    t = SymExpr.var(n, "t")
    r = SymExpr.var(n, "r")
    s = SymExpr.var(n, "s")
    xi = [zero] * n

    if kind == "H":
        return VectorFieldSpec(n=n, xi=tuple(xi), tau=SymExpr.const(n, 1),
                               phi=zero, sigma=zero)
    if kind == "P":
        _check_index(name.i, n)
        xi[name.i - 1] = SymExpr.const(n, 1)
        return VectorFieldSpec(n=n, xi=tuple(xi), tau=zero, phi=zero, sigma=zero)
    if kind == "L":
        j, k = name.i, name.j
        _check_index(j, n)
        _check_index(k, n)
        if not j < k:
            raise ValueError("rotation indices must satisfy j < k")
        xi[k - 1] = xvar(j)
        xi[j - 1] = -xvar(k)
        return VectorFieldSpec(n=n, xi=tuple(xi), tau=zero, phi=zero, sigma=zero)
    if kind == "D":
        return VectorFieldSpec(
            n=n, xi=tuple(xvar(j) for j in range(1, n + 1)), tau=2 * t,
            phi=SymExpr.const(n, Fraction(-n, 2)),
            sigma=SymExpr.const(n, n * p.mu1 / (2 * p.nu1)))
    if kind == "C":
        x_sq = sum((xvar(j) ** 2 for j in range(1, n + 1)), zero)
        return VectorFieldSpec(
            n=n, xi=tuple(xvar(j) * t for j in range(1, n + 1)), tau=t * t,
            phi=Fraction(-n, 2) * t,
            sigma=-(Fraction(1) / (4 * p.nu1)) * x_sq + (n * p.mu1 / (2 * p.nu1)) * t)
    if kind == "B":
        _check_index(name.i, n)
        xi[name.i - 1] = t
        return VectorFieldSpec(n=n, xi=tuple(xi), tau=zero, phi=zero,
                               sigma=-(Fraction(1) / (2 * p.nu1)) * xvar(name.i))
    if kind == "E":
        return VectorFieldSpec(n=n, xi=tuple(xi), tau=zero, phi=zero,
                               sigma=SymExpr.const(n, Fraction(-1) / (2 * p.nu1)))
    if kind == "R":
        return VectorFieldSpec(n=n, xi=tuple(xi), tau=zero,
                               phi=SymExpr.const(n, 1), sigma=zero)
    if kind == "A":
        return VectorFieldSpec(n=n, xi=tuple(xi), tau=-t, phi=zero,
                               sigma=(2 * p.nu2 / p.nu1) * r + s)
    if kind == "F":
        lam, eta, kappa = exp_rate_coefficients(p)
        e = SymExpr.exp_rs(n, eta, lam)
        return VectorFieldSpec(n=n, xi=tuple(xi), tau=zero, phi=e, sigma=-kappa * e)
    if kind == "Yf":
        if not name.poly:
            raise ValueError("Yf needs a polynomial payload, e.g. 'Yf:z^2'")
        return infsub_poly_generator(p, name.poly)
    if kind in ("Zheat", "Zse"):
        raise ValueError(
            f"{kind} has no exact coefficients in this expression class; "
            "use the flow entry points in dgsym.linearize")
    raise ValueError(f"unknown generator kind {kind!r}")


def _check_index(j, n):
    if not 1 <= j <= n:
        raise ValueError(f"index {j} out of range for n={n}")


# ---------------------------------------------------------------------------
# Commutator table.

@dataclass(frozen=True)
class CheckRow:
    label: str
    passed: bool
    detail: str = ""


def _expected_bracket(a: GeneratorName, b: GeneratorName, p: DGParams):
    """Expected [a, b] as a list of (coeff, GeneratorName); None means 'swap'."""
    ka, kb = a.kind, b.kind
    G = GeneratorName

    if (ka, kb) == ("D", "H"):
        return [(-2, G("H"))]
    if (ka, kb) == ("H", "C"):
        return [(1, G("D"))]
    if (ka, kb) == ("D", "C"):
        return [(2, G("C"))]
    if (ka, kb) == ("H", "B"):
        return [(1, G("P", i=b.i))]
    if (ka, kb) == ("D", "P"):
        return [(-1, G("P", i=b.i))]
    if (ka, kb) == ("D", "B"):
        return [(1, G("B", i=b.i))]
    if (ka, kb) == ("C", "P"):
        return [(-1, G("B", i=b.i))]
    if (ka, kb) == ("P", "B"):
        return [(1, G("E"))] if a.i == b.i else []
    if (ka, kb) == ("A", "H"):
        return [(1, G("H"))]
    if (ka, kb) == ("A", "C"):
        return [(-1, G("C"))]
    if (ka, kb) == ("A", "E"):
        return [(-1, G("E"))]
    if (ka, kb) == ("A", "R"):
        return [(4 * p.nu2, G("E"))]
    if (ka, kb) == ("A", "B"):
        return [(-1, G("B", i=b.i))]
    if (ka, kb) == ("L", "P"):
        j, k, l = a.i, a.j, b.i
        out = []
        if k == l:
            out.append((1, G("P", i=j)))
        if j == l:
            out.append((-1, G("P", i=k)))
        return out
    if (ka, kb) == ("L", "B"):
        j, k, l = a.i, a.j, b.i
        out = []
        if k == l:
            out.append((1, G("B", i=j)))
        if j == l:
            out.append((-1, G("B", i=k)))
        return out
    if (ka, kb) == ("L", "L"):
        j, k = a.i, a.j
        l, m = b.i, b.j
        out = []
        # delta_kl L_jm + delta_jm L_kl - delta_jl L_km - delta_km L_jl
        for d, (u, v) in (((k == l), (j, m)), ((j == m), (k, l)),
                          (-(j == l), (k, m)), (-(k == m), (j, l))):
            if d:
                if u == v:
                    continue
                if u < v:
                    out.append((d, G("L", i=u, j=v)))
                else:
                    out.append((-d, G("L", i=v, j=u)))
        return out
    return None


def _combo_field(terms, p: DGParams) -> VectorFieldSpec:
    out = VectorFieldSpec.zero(p.n)
    for coeff, gname in terms:
        out = out + basis_generator(gname, p, require_admissible=False).scale(coeff)
    return out


def verify_commutator_table(p: DGParams, n: int | None = None) -> list:
    """Check every pairwise bracket of the finite basis against the table.

    All listed nontrivial brackets plus closure (unlisted pairs commute) are
    verified as exact symbolic identities.  The full basis including A, C, B
    exists on the two-parameter subfamily where Galilei and affine conditions
    both hold; p should lie there for the complete table.
    """
    if n is not None:
        p = p.replace(n=n)
    n = p.n
    names = [GeneratorName("H"), GeneratorName("D"), GeneratorName("C"),
             GeneratorName("A"), GeneratorName("E"), GeneratorName("R")]
    names += [GeneratorName("P", i=j) for j in range(1, n + 1)]
    names += [GeneratorName("B", i=j) for j in range(1, n + 1)]
    names += [GeneratorName("L", i=j, j=k)
              for j in range(1, n + 1) for k in range(j + 1, n + 1)]

    fields = {g: basis_generator(g, p, require_admissible=False) for g in names}
    rows = []
    for ia, a in enumerate(names):
        for b in names[ia + 1:]:
            expected = _expected_bracket(a, b, p)
            sign = 1
            if expected is None:
                flipped = _expected_bracket(b, a, p)
                expected = [] if flipped is None else flipped
                sign = -1
            got = lie_bracket(fields[a], fields[b])
            want = _combo_field(expected, p).scale(sign)
            diff = got - want
            rows.append(CheckRow(
                label=f"[{a},{b}]",
                passed=diff.is_zero,
                detail="" if diff.is_zero else f"mismatch: {diff.component_map()}",
            ))
    return rows


# ---------------------------------------------------------------------------
# Infinite-family bracket relations (polynomial payloads).

def _poly_diff(f):
    return tuple(k * c for k, c in enumerate(f))[1:] or (Fraction(0),)


def _poly_mul(f, g):
    out = [Fraction(0)] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        for j, b in enumerate(g):
            out[i + j] += Fraction(a) * Fraction(b)
    return tuple(out)


def _poly_sub(f, g):
    m = max(len(f), len(g))
    f = tuple(f) + (Fraction(0),) * (m - len(f))
    g = tuple(g) + (Fraction(0),) * (m - len(g))
    return tuple(Fraction(a) - Fraction(b) for a, b in zip(f, g))


def _poly_vf_bracket(f, g):
    """[f, g](z) = f g' - g f'."""
    return _poly_sub(_poly_mul(f, _poly_diff(g)), _poly_mul(g, _poly_diff(f)))


def verify_infinite_relations(p: DGParams, max_degree: int = 4) -> list:
    """Bracket relations of the polynomial Y_f family at an InfSub point.

    Checks [Y_f, Y_g] = (mu1 - 2 nu2) Y_{fg'-gf'} for monomials up to
    max_degree, plus [Y_f, R] = -mu1 Y_{f'} and [Y_f, E] = (1/2) Y_{f'}.
    When the commutative condition mu1 = 2 nu2 holds, A exists as well and
    [A, Y_f] = Y_{z f'} is checked.
    """
    if not predicate_report(p)["InfSub"]:
        raise GeneratorNotAdmissible("Y_f relations require the infinite subfamily")
    rows = []
    mono = lambda d: tuple(Fraction(0) for _ in range(d)) + (Fraction(1),)

    R = basis_generator("R", p)
    E = basis_generator("E", p)
    for d1 in range(max_degree + 1):
        f = mono(d1)
        Yf = infsub_poly_generator(p, f)
        fp = _poly_diff(f)
        diff = lie_bracket(Yf, R) - infsub_poly_generator(p, fp).scale(-p.mu1)
        rows.append(CheckRow(f"[Y_z^{d1},R]", diff.is_zero))
        diff = lie_bracket(Yf, E) - infsub_poly_generator(p, fp).scale(Fraction(1, 2))
        rows.append(CheckRow(f"[Y_z^{d1},E]", diff.is_zero))
        for d2 in range(d1, max_degree + 1):
            g = mono(d2)
            Yg = infsub_poly_generator(p, g)
            want = infsub_poly_generator(p, _poly_vf_bracket(f, g)).scale(p.mu1 - 2 * p.nu2)
            diff = lie_bracket(Yf, Yg) - want
            rows.append(CheckRow(f"[Y_z^{d1},Y_z^{d2}]", diff.is_zero))

    if p.mu1 == 2 * p.nu2:
        A = basis_generator("A", p)
        for d in range(max_degree + 1):
            f = mono(d)
            zfp = _poly_mul((Fraction(0), Fraction(1)), _poly_diff(f))
            diff = lie_bracket(A, infsub_poly_generator(p, f)) \
                - infsub_poly_generator(p, zfp)
            rows.append(CheckRow(f"[A,Y_z^{d}]", diff.is_zero))
    return rows


# ---------------------------------------------------------------------------
# Determining equations.

def determining_residuals(p: DGParams, X: VectorFieldSpec) -> list:
    """Left-hand sides of the determining equations with X substituted.

    X must already satisfy the reduction coming from the trivial equations:
    xi independent of (r, s) and tau a function of t alone.  Returns
    (label, SymExpr) pairs; X generates a symmetry at p iff all are zero.
    The sixteen equation families are labeled det01..det16 in source order,
    the rotation condition rot(j,k) is emitted once per index pair.
    """
    n = X.n
    if n != p.n:
        raise ValueError("vector field arity differs from parameter dimension")
    for j, comp in enumerate(X.xi, start=1):
        if comp.depends_on("r") or comp.depends_on("s"):
            raise ValueError(f"xi{j} must not depend on (r, s)")
    for name in ("r", "s") + tuple(f"x{j}" for j in range(1, n + 1)):
        if X.tau.depends_on(name):
            raise ValueError("tau must depend on t only")

    nu1, nu2 = p.nu1, p.nu2
    mu1, mu2, mu3, mu4, mu5 = p.mu1, p.mu2, p.mu3, p.mu4, p.mu5

    phi, sigma, tau = X.phi, X.sigma, X.tau
    xs = [f"x{j}" for j in range(1, n + 1)]

    def d(e, *names):
        for nm in names:
            e = e.differentiate(nm)
        return e

    def lap(e):
        out = SymExpr.zero(n)
        for nm in xs:
            out = out + d(e, nm, nm)
        return out

    tau_t = d(tau, "t")
    phi_r, phi_s = d(phi, "r"), d(phi, "s")
    phi_rr, phi_ss, phi_rs = d(phi_r, "r"), d(phi_s, "s"), d(phi_r, "s")
    sig_r, sig_s = d(sigma, "r"), d(sigma, "s")
    sig_rr, sig_ss, sig_rs = d(sig_r, "r"), d(sig_s, "s"), d(sig_r, "s")

    out = []
    for j in range(1, n + 1):
        xj = f"x{j}"
        xi_j = X.xi[j - 1]
        lap_xi = lap(xi_j)
        xi_t = d(xi_j, "t")
        xi_x = d(xi_j, xj)
        phi_x, sig_x = d(phi, xj), d(sigma, xj)
        phi_xs, phi_xr = d(phi_x, "s"), d(phi_x, "r")
        sig_xs, sig_xr = d(sig_x, "s"), d(sig_x, "r")

        out.append((f"det01[{j}]",
                    -xi_t - mu1 * lap_xi + 2 * (mu1 + mu4) * phi_x
                    + 4 * mu2 * phi_xs + 2 * mu3 * sig_x + 2 * mu1 * sig_xs))
        out.append((f"det02[{j}]",
                    -nu1 * lap_xi + 2 * nu1 * phi_x + 4 * nu2 * phi_xs
                    + 2 * nu1 * sig_xs))
        out.append((f"det03[{j}]",
                    -mu2 * lap_xi + 4 * (mu2 + mu5) * phi_x + 2 * mu2 * phi_xr
                    + (mu1 + mu4) * sig_x + mu1 * sig_xr))
        out.append((f"det04[{j}]",
                    xi_t - 2 * nu2 * lap_xi + 8 * nu2 * phi_x + 4 * nu2 * phi_xr
                    + 2 * nu1 * sig_x + 2 * nu1 * sig_xr))
        out.append((f"det07[{j}]",
                    2 * (mu1 + mu4) * phi_s + 2 * mu2 * phi_ss + mu3 * sig_s
                    + mu1 * sig_ss + mu3 * tau_t - 2 * mu3 * xi_x))
        out.append((f"det08[{j}]",
                    2 * mu2 * phi_s + nu1 * sig_r + mu1 * tau_t - 2 * mu1 * xi_x))
        out.append((f"det09[{j}]",
                    (mu1 + 2 * nu2) * phi_s - nu1 * phi_r + nu1 * sig_s
                    + nu1 * tau_t - 2 * nu1 * xi_x))
        out.append((f"det10[{j}]",
                    4 * (mu2 + mu5) * phi_s + (mu1 + mu4) * phi_r + 2 * mu2 * phi_rs
                    + (mu3 + nu1) * sig_r + mu1 * sig_rs + (mu1 + mu4) * tau_t
                    - 2 * (mu1 + mu4) * xi_x))
        out.append((f"det11[{j}]",
                    2 * mu2 * phi_r - 2 * mu2 * sig_s + (mu1 + 2 * nu2) * sig_r
                    + 2 * mu2 * tau_t - 4 * mu2 * xi_x))
        out.append((f"det12[{j}]",
                    2 * mu2 * phi_s + nu1 * sig_r + 2 * nu2 * tau_t - 4 * nu2 * xi_x))
        out.append((f"det13[{j}]",
                    (mu1 + mu4 + 4 * nu2) * phi_s + 2 * nu2 * phi_rs + nu1 * sig_s
                    + nu1 * sig_rs + nu1 * tau_t - 2 * nu1 * xi_x))
        out.append((f"det14[{j}]",
                    8 * (mu2 + mu5) * phi_r + 2 * mu2 * phi_rr
                    - 4 * (mu2 + mu5) * sig_s
                    + 2 * (mu1 + mu4 + 2 * nu2) * sig_r + mu1 * sig_rr
                    + 4 * (mu2 + mu5) * tau_t - 8 * (mu2 + mu5) * xi_x))
        out.append((f"det15[{j}]",
                    4 * (mu2 + mu5) * phi_s + 4 * nu2 * phi_r + 2 * nu2 * phi_rr
                    + 2 * nu1 * sig_r + nu1 * sig_rr + 4 * nu2 * tau_t
                    - 8 * nu2 * xi_x))

    out.append(("det05", d(sigma, "t") + mu1 * lap(sigma) + 2 * mu2 * lap(phi)))
    out.append(("det06", -d(phi, "t") + 2 * nu2 * lap(phi) + nu1 * lap(sigma)))
    out.append(("det16",
                mu3 * phi_s + 2 * nu1 * phi_s + 2 * nu2 * phi_ss + nu1 * sig_ss))

    for j in range(1, n + 1):
        for k in range(j + 1, n + 1):
            out.append((f"rot[{j},{k}]",
                        d(X.xi[j - 1], f"x{k}") + d(X.xi[k - 1], f"x{j}")))
    return out


def residuals_all_zero(residuals) -> bool:
    return all(expr.is_zero for _, expr in residuals)
