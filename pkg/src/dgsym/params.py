"""Parameter space of the Doebner-Goldin family and its nonlinear gauge structure.

The free family is coordinatized by eight real model parameters
(nu1, nu2, mu0..mu5) with nu1 != 0, plus the spatial dimension n.  A
two-parameter group of nonlinear gauge transformations (Lambda, gamma),
isomorphic to Aff(1), acts on wavefunctions and on the parameter space; six
rational invariants iota0..iota5 coordinatize the orbit space.  The maximal
Lie-symmetry class of a parameter point is decided by exact comparisons of
raw-parameter subfamily predicates, all of which are gauge invariant.

Everything here is exact: parameters are ``fractions.Fraction`` and no
floating point enters any predicate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Union

RationalLike = Union[Fraction, int, str]

PARAM_NAMES = ("nu1", "nu2", "mu0", "mu1", "mu2", "mu3", "mu4", "mu5")

CLASS_TAGS = (
    "Sym0", "Sym1", "Sym2", "Sym3", "Sym4", "Sym0a", "Sym2a", "Sym1b", "Sym1c",
)

# Structure of the maximal symmetry algebra carried by each class tag.
ALGEBRA_STRUCTURE = {
    "Sym0": "(aff(1) |x e(n)) (+) t(2)",
    "Sym1": "sch_e(n) (+) t(1)",
    "Sym2": "(aff(1) |x (aff(1) |x e(n))) (+) t(1)",
    "Sym3": "(aff(1) |x sch(n)) (+) t(1)",
    "Sym4": "(t(2) |x t(1)) (+) (aff(1) |x e(n))",
    "Sym0a": "(aff(1) |x e(n)) (+) (t(1) |x a_inf) (+) t(1)",
    "Sym2a": "(aff(1) |x ((aff(1) |x e(n)) (+) a_inf)) (+) t(1)",
    "Sym1b": "(sch_e(n) (+) t(1)) |x b_inf",
    "Sym1c": "(sch_e(n) (+) t(1)) |x c_inf",
}


def as_rational(value: RationalLike) -> Fraction:
    """Coerce an int, Fraction or 'p/q' string to an exact Fraction.

    Floats are rejected on purpose: the gauge algebra must stay exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational parameter")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected int, Fraction or 'p/q' string, got {type(value).__name__}")


def rational_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class DGParams:
    """One point of the family: dimension n and the eight model parameters."""

    n: int
    nu1: Fraction
    nu2: Fraction = Fraction(0)
    mu0: Fraction = Fraction(0)
    mu1: Fraction = Fraction(0)
    mu2: Fraction = Fraction(0)
    mu3: Fraction = Fraction(0)
    mu4: Fraction = Fraction(0)
    mu5: Fraction = Fraction(0)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"spatial dimension must be a positive integer, got {self.n!r}")
        for name in PARAM_NAMES:
            object.__setattr__(self, name, as_rational(getattr(self, name)))
        if self.nu1 == 0:
            raise ValueError("nu1 must be nonzero")

    def replace(self, **kw) -> "DGParams":
        return replace(self, **kw)

    def as_float_dict(self) -> dict:
        return {name: float(getattr(self, name)) for name in PARAM_NAMES}

    def to_json_dict(self) -> dict:
        d = {"n": self.n}
        d.update({name: rational_str(getattr(self, name)) for name in PARAM_NAMES})
        return d

    @classmethod
    def from_json_dict(cls, d) -> "DGParams":
        unknown = set(d) - set(PARAM_NAMES) - {"n"}
        if unknown:
            raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
        if "n" not in d or "nu1" not in d:
            raise ValueError("parameter file must define at least 'n' and 'nu1'")
        kw = {name: as_rational(d[name]) for name in PARAM_NAMES if name in d}
        return cls(n=int(d["n"]), **kw)

    @classmethod
    def load(cls, path) -> "DGParams":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")


@dataclass(frozen=True)
class GaugeElement:
    """Element (Lambda, gamma) of the gauge group, Lambda != 0."""

    Lambda: Fraction
    gamma: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "Lambda", as_rational(self.Lambda))
        object.__setattr__(self, "gamma", as_rational(self.gamma))
        if self.Lambda == 0:
            raise ValueError("Lambda must be nonzero")


@dataclass(frozen=True)
class GaugeInvariants:
    iota0: Fraction
    iota1: Fraction
    iota2: Fraction
    iota3: Fraction
    iota4: Fraction
    iota5: Fraction

    def as_tuple(self):
        return (self.iota0, self.iota1, self.iota2, self.iota3, self.iota4, self.iota5)

    def to_json_dict(self) -> dict:
        return {f"iota{i}": rational_str(v) for i, v in enumerate(self.as_tuple())}


@dataclass(frozen=True)
class SymmetryClass:
    """Classification result: class tag, algebra structure, predicate report."""

    tag: str
    algebra: str
    predicates: dict

    def __str__(self):
        return self.tag


def gauge_identity() -> GaugeElement:
    return GaugeElement(Fraction(1), Fraction(0))


def gauge_compose(g1: GaugeElement, g2: GaugeElement) -> GaugeElement:
    """Group law: (L1, c1) o (L2, c2) = (L1*L2, L1*c2 + c1)."""
    return GaugeElement(g1.Lambda * g2.Lambda, g1.Lambda * g2.gamma + g1.gamma)


def gauge_inverse(g: GaugeElement) -> GaugeElement:
    inv = 1 / g.Lambda
    return GaugeElement(inv, -inv * g.gamma)


def gauge_act_params(g: GaugeElement, p: DGParams) -> DGParams:
    """Left action of the gauge group on the parameter space, exact."""
    L, c = g.Lambda, g.gamma
    return DGParams(
        n=p.n,
        nu1=p.nu1 / L,
        nu2=-c / (2 * L) * p.nu1 + p.nu2,
        mu0=L * p.mu0,
        mu1=-c / L * p.nu1 + p.mu1,
        mu2=c * c / (2 * L) * p.nu1 - c * p.nu2 - c / 2 * p.mu1 + L * p.mu2,
        mu3=p.mu3 / L,
        mu4=-c / L * p.mu3 + p.mu4,
        mu5=c * c / (4 * L) * p.mu3 - c / 2 * p.mu4 + L * p.mu5,
    )


def compute_invariants(p: DGParams) -> GaugeInvariants:
    """The six exact gauge invariants of a parameter point."""
    return GaugeInvariants(
        iota0=p.nu1 * p.mu0,
        iota1=p.nu1 * p.mu2 - p.nu2 * p.mu1,
        iota2=p.mu1 - 2 * p.nu2,
        iota3=1 + p.mu3 / p.nu1,
        iota4=p.mu4 - p.mu1 * p.mu3 / p.nu1,
        iota5=p.nu1 * (p.mu2 + 2 * p.mu5)
        - p.nu2 * (p.mu1 + 2 * p.mu4)
        + 2 * p.nu2 ** 2 * p.mu3 / p.nu1,
    )


def canonical_gauge(p: DGParams) -> tuple[GaugeElement, DGParams]:
    """Gauge element (nu1, mu1) normalizing a point to nu1' = 1, mu1' = 0."""
    g = GaugeElement(p.nu1, p.mu1)
    return g, gauge_act_params(g, p)


# ---------------------------------------------------------------------------
# Subfamily predicates (raw parameters, exact comparisons).

def is_gal_sub(p: DGParams) -> bool:
    """Galilei-invariant subfamily: mu1 + mu4 = 0 and mu3 + nu1 = 0."""
    return p.mu1 + p.mu4 == 0 and p.mu3 + p.nu1 == 0


def is_fin_sub(p: DGParams) -> bool:
    """Subfamily admitting the extra finite generator acting on (r, s)."""
    return (
        p.mu1 == 2 * p.nu2
        and p.mu2 == 2 * p.nu2 ** 2 / p.nu1
        and p.mu4 == 2 * p.mu3 * p.nu2 / p.nu1
        and p.mu5 == p.mu3 * p.nu2 ** 2 / p.nu1 ** 2
    )


def is_inf_sub(p: DGParams) -> bool:
    """Subfamily with the infinite vector-field symmetry Y_f."""
    return (
        p.mu2 == p.nu2 * p.mu1 / p.nu1
        and p.mu3 == -2 * p.nu1
        and p.mu4 == -2 * p.nu2 - p.mu1
        and p.mu5 == -p.nu2 * p.mu1 / p.nu1
    )


def is_infa_sub(p: DGParams) -> bool:
    """Commutative case of the infinite subfamily (mu1 = 2 nu2)."""
    return is_inf_sub(p) and p.mu1 == 2 * p.nu2


def is_ehr_sub(p: DGParams) -> bool:
    """Linearizable subfamily (heat pair for iota1 < 0, free SE for iota1 > 0)."""
    return (
        p.mu1 == 2 * p.nu2
        and p.mu3 == -p.nu1
        and p.mu4 == -2 * p.nu2
        and p.mu5 == -p.mu2 / 2
        and p.mu2 != 2 * p.nu2 ** 2 / p.nu1
    )


def is_exp_sub(p: DGParams) -> bool:
    """Subfamily admitting the exponential vertical generator F."""
    if p.mu1 - 2 * p.nu2 == 0 or p.mu3 + p.nu1 == 0:
        return False
    mu2 = (
        p.mu3 * (p.mu1 + 2 * p.nu2) ** 2 * (p.mu3 + 2 * p.nu1)
        + 8 * p.mu1 * p.nu1 ** 2 * p.nu2
    ) / (8 * p.nu1 * (p.mu3 + p.nu1) ** 2)
    mu4 = p.mu3 * (p.mu1 + 2 * p.nu2) / (2 * p.nu1)
    mu5 = p.mu3 / (2 * p.nu1) * p.mu2
    return p.mu2 == mu2 and p.mu4 == mu4 and p.mu5 == mu5


PREDICATES = {
    "GalSub": is_gal_sub,
    "FinSub": is_fin_sub,
    "InfSub": is_inf_sub,
    "InfaSub": is_infa_sub,
    "EhrSub": is_ehr_sub,
    "ExpSub": is_exp_sub,
}


def predicate_report(p: DGParams) -> dict:
    """Every subfamily predicate evaluated at p (for inspecting ambiguous points)."""
    return {name: fn(p) for name, fn in PREDICATES.items()}


def classify(p: DGParams) -> SymmetryClass:
    """Most-special symmetry class of p, by fixed priority over exact predicates.

    Priority: linearizable branch first, then the infinite vector-field
    subfamilies, then the finite special classes, then the exponential class,
    and the generic class last.  Degenerate overlaps resolve toward the more
    symmetric class.
    """
    report = predicate_report(p)
    if report["EhrSub"]:
        iota1 = compute_invariants(p).iota1
        tag = "Sym1b" if iota1 < 0 else "Sym1c"
    elif report["InfSub"]:
        tag = "Sym2a" if report["InfaSub"] else "Sym0a"
    elif report["GalSub"] and report["FinSub"]:
        tag = "Sym3"
    elif report["GalSub"]:
        tag = "Sym1"
    elif report["FinSub"]:
        tag = "Sym2"
    elif report["ExpSub"]:
        tag = "Sym4"
    else:
        tag = "Sym0"
    return SymmetryClass(tag=tag, algebra=ALGEBRA_STRUCTURE[tag], predicates=report)


# ---------------------------------------------------------------------------
# Constructors for subfamily representatives (free parameters -> full point).

def make_gal_sub(n, nu1, nu2, mu1, mu2, mu5, mu0=0) -> DGParams:
    nu1 = as_rational(nu1)
    mu1 = as_rational(mu1)
    return DGParams(n=n, nu1=nu1, nu2=nu2, mu0=mu0, mu1=mu1, mu2=mu2,
                    mu3=-nu1, mu4=-mu1, mu5=mu5)


def make_fin_sub(n, nu1, nu2, mu3, mu0=0) -> DGParams:
    nu1, nu2, mu3 = map(as_rational, (nu1, nu2, mu3))
    return DGParams(n=n, nu1=nu1, nu2=nu2, mu0=mu0, mu1=2 * nu2,
                    mu2=2 * nu2 ** 2 / nu1, mu3=mu3,
                    mu4=2 * mu3 * nu2 / nu1, mu5=mu3 * nu2 ** 2 / nu1 ** 2)


def make_inf_sub(n, nu1, nu2, mu1, mu0=0) -> DGParams:
    nu1, nu2, mu1 = map(as_rational, (nu1, nu2, mu1))
    return DGParams(n=n, nu1=nu1, nu2=nu2, mu0=mu0, mu1=mu1,
                    mu2=nu2 * mu1 / nu1, mu3=-2 * nu1,
                    mu4=-2 * nu2 - mu1, mu5=-nu2 * mu1 / nu1)


def make_infa_sub(n, nu1, nu2, mu0=0) -> DGParams:
    nu2 = as_rational(nu2)
    return make_inf_sub(n, nu1, nu2, 2 * nu2, mu0=mu0)


def make_ehr_sub(n, nu1, nu2, mu2, mu0=0) -> DGParams:
    nu1, nu2, mu2 = map(as_rational, (nu1, nu2, mu2))
    if mu2 == 2 * nu2 ** 2 / nu1:
        raise ValueError("mu2 = 2 nu2^2/nu1 lies outside the linearizable subfamily")
    return DGParams(n=n, nu1=nu1, nu2=nu2, mu0=mu0, mu1=2 * nu2, mu2=mu2,
                    mu3=-nu1, mu4=-2 * nu2, mu5=-mu2 / 2)


def make_sym3(n, nu1, nu2, mu0=0) -> DGParams:
    nu1, nu2 = as_rational(nu1), as_rational(nu2)
    return DGParams(n=n, nu1=nu1, nu2=nu2, mu0=mu0, mu1=2 * nu2,
                    mu2=2 * nu2 ** 2 / nu1, mu3=-nu1, mu4=-2 * nu2,
                    mu5=-nu2 ** 2 / nu1)


def make_exp_sub(n, nu1, nu2, mu1, mu3, mu0=0) -> DGParams:
    nu1, nu2, mu1, mu3 = map(as_rational, (nu1, nu2, mu1, mu3))
    if mu1 == 2 * nu2 or mu3 == -nu1:
        raise ValueError("exponential subfamily needs mu1 != 2 nu2 and mu3 != -nu1")
    mu2 = (mu3 * (mu1 + 2 * nu2) ** 2 * (mu3 + 2 * nu1) + 8 * mu1 * nu1 ** 2 * nu2) \
        / (8 * nu1 * (mu3 + nu1) ** 2)
    return DGParams(n=n, nu1=nu1, nu2=nu2, mu0=mu0, mu1=mu1, mu2=mu2, mu3=mu3,
                    mu4=mu3 * (mu1 + 2 * nu2) / (2 * nu1), mu5=mu3 * mu2 / (2 * nu1))


def reference_points(n: int = 1) -> dict:
    """Named exact representatives of each subfamily, used by tests and the CLI."""
    F = Fraction
    return {
        # free linear SE written in family coordinates: i psi_t = -Lap psi
        "linear-se": DGParams(n=n, nu1=F(-1), mu2=F(-1, 2), mu3=F(1), mu5=F(1, 4)),
        "sym1b": DGParams(n=n, nu1=F(1), mu2=F(-1), mu3=F(-1), mu5=F(1, 2)),
        "sym1c": DGParams(n=n, nu1=F(1), mu2=F(1), mu3=F(-1), mu5=F(-1, 2)),
        "sym1b-nu2": make_ehr_sub(n, 1, F(1, 2), F(-1, 2)),
        "sym1c-nu2": make_ehr_sub(n, 1, F(1, 2), F(3, 2)),
        "galsub": make_gal_sub(n, 1, F(1, 3), F(1, 5), F(2, 7), F(3, 11)),
        "finsub": make_fin_sub(n, 1, F(1, 2), F(2, 3)),
        "sym3": make_sym3(n, 1, 0),
        "sym3-nu2": make_sym3(n, 1, F(1, 2)),
        "infsub": make_inf_sub(n, 1, F(1, 4), 1),
        "infasub": make_infa_sub(n, 1, F(1, 2)),
        "expsub": make_exp_sub(n, 1, 0, 1, 0),
        "expsub-nu2": make_exp_sub(n, 1, F(1, 3), 1, F(1, 2)),
        "generic": DGParams(n=n, nu1=F(1), nu2=F(1, 5), mu1=F(1, 2), mu2=F(1, 3),
                            mu3=F(1, 7), mu4=F(2, 3), mu5=F(5)),
    }
