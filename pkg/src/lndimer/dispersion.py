"""Anisotropic van der Waals coefficients from atomic line lists.

Second-order dipole-dipole perturbation theory for two ground-state atoms of
angular momentum j, recoupled into the seven spin-tensor operators

    (k, i) = (0,1) I, (2,1) [j1 j1]_2 + [j2 j2]_2, (0,2) [j1 j2]_0,
             (2,2) [j1 j2]_2, (0,3), (2,3), (4,1) [[j1 j1]_2 [j2 j2]_2]_k.

Each coefficient C_k^(i) multiplies the body-frame operator as C/R^6, so the
isotropic (0,1) term is negative (attractive).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .constants import Constants, load_constants, normalize_species
from .lines import LineList, reduced_dipole_sq
from .wigner import clebsch_gordan, racah_w, wigner_9j

__all__ = [
    "OPERATORS",
    "INDEPENDENT",
    "HMatrix",
    "DispersionSet",
    "m_factor",
    "h_matrix",
    "vdw_coefficients",
    "propagate_uncertainties",
    "monte_carlo_uncertainties",
    "gaussian_uncertainties",
    "long_range_extras",
    "spin_stretched_c6",
    "exact_ratios",
]

# (k, i) -> (l1, l2) ranks of the single-atom operators; (2,1) is the
# symmetric sum of (2,0) and (0,2), whose coefficients coincide for identical atoms.
OPERATORS: dict[tuple[int, int], tuple[int, int]] = {
    (0, 1): (0, 0),
    (2, 1): (2, 0),
    (0, 2): (1, 1),
    (2, 2): (1, 1),
    (0, 3): (2, 2),
    (2, 3): (2, 2),
    (4, 1): (2, 2),
}
INDEPENDENT: tuple[tuple[int, int], ...] = ((0, 1), (2, 1), (0, 2), (0, 3))


def exact_ratios() -> dict[tuple[int, int], tuple[tuple[int, int], float]]:
    """Dependent coefficient -> (independent partner, exact ratio)."""
    return {
        (2, 2): ((0, 2), math.sqrt(2.0)),
        (2, 3): ((0, 3), math.sqrt(10.0 / 7.0)),
        (4, 1): ((0, 3), 6.0 * math.sqrt(18.0 / 7.0)),
    }


def m_factor(tb: int, tj: int, l: int) -> float:
    """M(b, j; l): scalar linking the excited-state sum B_lq(b, j) to O_lq.

    ``tb`` and ``tj`` are doubled angular momenta.  O_l is the identity, j/hbar
    and [j x j]_2/hbar^2 for l = 0, 1, 2.
    """
    if abs(tb - tj) > 2 or (tb - tj) % 2:
        raise ValueError(f"b={tb}/2 is not E1-connected to j={tj}/2")
    if tj <= 0:
        raise ValueError("ground-state j must be positive")
    j, b = tj / 2, tb / 2
    ratio = math.sqrt((tb + 1) / (tj + 1))
    phase = -1.0 if ((tb - tj) // 2) % 2 else 1.0
    if l == 0:
        return -phase * ratio / math.sqrt(3.0)
    if l == 1:
        return phase * ratio / (2.0 * math.sqrt(2.0)) * (2.0 + j * (j + 1) - b * (b + 1)) / (j * (j + 1))
    if l == 2:
        if tj < 2:
            return 0.0
        return ratio * racah_w(tj, 2, tj, 2, tb, 4) / racah_w(tj, 2, tj, 2, tj, 4) / (j * (j + 1))
    raise ValueError(f"rank l must be 0, 1 or 2, got {l}")


@lru_cache(maxsize=64)
def _operator_prefactor(tj: int, k: int, l1: int, l2: int) -> float:
    """Angular factor in front of the b1, b2 double sum (homonuclear, j1 = j2 = j)."""
    return (
        30.0 * math.sqrt((2 * l1 + 1) * (2 * l2 + 1)) / (tj + 1)
        * wigner_9j(2, 2, 2 * l1, 2, 2, 2 * l2, 4, 4, 2 * k)
        * clebsch_gordan(4, 4, 0, 0, 2 * k, 0)
    )


def _b_values(tj: int) -> list[int]:
    return [tj - 2, tj, tj + 2]


@lru_cache(maxsize=64)
def _weights(tj: int, k: int, l1: int, l2: int) -> np.ndarray:
    """3x3 weights w[b1, b2] with C = sum_b1b2 w[b1, b2] h[b1, b2]."""
    bs = _b_values(tj)
    pre = _operator_prefactor(tj, k, l1, l2)
    w = np.zeros((3, 3))
    for a, tb1 in enumerate(bs):
        for c, tb2 in enumerate(bs):
            if tb1 < 0 or tb2 < 0:
                continue
            phase = (-1) ** ((tb1 - tj) // 2 + (tb2 - tj) // 2)
            w[a, c] = pre * phase / math.sqrt((tb1 + 1) * (tb2 + 1)) \
                * m_factor(tb1, tj, l1) * m_factor(tb2, tj, l2)
    return w


@dataclass(frozen=True)
class HMatrix:
    """h[b1, b2] in E_h a0^6, rows/columns ordered b = j-1, j, j+1."""

    twice_j: int
    values: np.ndarray

    def __getitem__(self, key):
        tb1, tb2 = key
        bs = _b_values(self.twice_j)
        return self.values[bs.index(tb1), bs.index(tb2)]

    def is_symmetric(self, rtol=1e-12) -> bool:
        return np.allclose(self.values, self.values.T, rtol=rtol, atol=0.0)


def _line_arrays(lines: LineList, constants: Constants):
    d_sq = np.array([reduced_dipole_sq(r, lines.ground_j, constants) for r in lines])
    energy = np.array([r.delta_e for r in lines]) / constants.hartree_in_cm
    b_index = np.array([_b_values(lines.ground_j.twice_j).index(r.j_excited.twice_j) for r in lines])
    rel_u = np.array([r.u_strength / r.strength if r.strength > 0 else 0.0 for r in lines])
    return d_sq, energy, b_index, rel_u


def h_matrix(lines1: LineList, lines2: LineList, constants: Constants | None = None) -> HMatrix:
    """Energy-denominator sums over all excited-state pairs, grouped by (b1, b2)."""
    c = constants or load_constants()
    if len(lines1) == 0 or len(lines2) == 0:
        raise ValueError("h matrix needs non-empty line lists")
    if lines1.ground_j != lines2.ground_j:
        raise NotImplementedError("heteronuclear pairs are not supported")
    d1, e1, b1, _ = _line_arrays(lines1, c)
    d2, e2, b2, _ = _line_arrays(lines2, c)
    terms = np.outer(d1, d2) / (-e1[:, None] - e2[None, :])
    h = np.zeros((3, 3))
    np.add.at(h, (b1[:, None].repeat(len(b2), 1), b2[None, :].repeat(len(b1), 0)), terms)
    return HMatrix(lines1.ground_j.twice_j, h)


@dataclass(frozen=True)
class DispersionSet:
    """Seven C_k^(i) in E_h a0^6 with one-sigma uncertainties.

    ``corr`` is the correlation matrix over INDEPENDENT; ``cov`` is the full
    7x7 covariance in OPERATORS order.
    """

    species: str
    twice_j: int
    values: dict
    u: dict = field(default_factory=dict)
    corr: np.ndarray | None = None
    cov: np.ndarray | None = None

    def __getitem__(self, key: tuple[int, int]) -> float:
        return self.values[key]

    @property
    def c_ss(self) -> float:
        """C6 of the spin-stretched state, C0^(1) + 2j(2j-1) C2^(1)/sqrt(6)."""
        return spin_stretched_c6(self.values[(0, 1)], self.values[(2, 1)], self.twice_j)

    @property
    def u_c_ss(self) -> float:
        if self.cov is None:
            return float("nan")
        keys = list(OPERATORS)
        g = np.zeros(len(keys))
        g[keys.index((0, 1))] = 1.0
        g[keys.index((2, 1))] = self.twice_j * (self.twice_j - 1) / math.sqrt(6.0)
        return float(math.sqrt(g @ self.cov @ g))

    @classmethod
    def published(cls, species: str) -> "DispersionSet":
        """Reference values as printed in the literature table bundled with the package."""
        import json
        from .constants import data_path

        species = normalize_species(species)
        ref = json.loads(data_path("table1_reference.json").read_text(encoding="utf-8"))[species]
        values = {(c["k"], c["i"]): c["value"] for c in ref["coefficients"]}
        u = {(c["k"], c["i"]): c["u"] for c in ref["coefficients"]}
        tj = load_constants().atom(species).twice_j
        return cls(species, tj, values, u, np.array(ref["correlations"]), None)

    def to_json(self) -> dict:
        out = {
            "species": self.species,
            "coefficients": [
                {"k": k, "i": i, "value": self.values[(k, i)], "u": self.u.get((k, i))}
                for (k, i) in OPERATORS
            ],
            "c_ss": self.c_ss,
        }
        if self.corr is not None:
            out["correlations"] = {
                "order": [f"{k},{i}" for k, i in INDEPENDENT],
                "matrix": np.asarray(self.corr).tolist(),
            }
        return out

    @classmethod
    def from_json(cls, data: dict) -> "DispersionSet":
        species = normalize_species(data["species"])
        values = {(c["k"], c["i"]): c["value"] for c in data["coefficients"]}
        u = {(c["k"], c["i"]): c["u"] for c in data["coefficients"] if c.get("u") is not None}
        corr = data.get("correlations")
        tj = load_constants().atom(species).twice_j
        return cls(species, tj, values, u, None if corr is None else np.array(corr["matrix"]), None)


def spin_stretched_c6(c01: float, c21: float, twice_j: int) -> float:
    return c01 + twice_j * (twice_j - 1) * c21 / math.sqrt(6.0)


def _coefficient_matrices(lines: LineList, constants: Constants):
    """Per-line quadratic forms: C_(k,i) = s^T Q_(k,i) s with s the |d|^2 vector."""
    d_sq, energy, b_index, rel_u = _line_arrays(lines, constants)
    denom = 1.0 / (-energy[:, None] - energy[None, :])
    tj = lines.ground_j.twice_j
    forms = {}
    for key, (l1, l2) in OPERATORS.items():
        w = _weights(tj, key[0], l1, l2)
        forms[key] = w[b_index[:, None], b_index[None, :]] * denom
    return d_sq, rel_u, forms


def vdw_coefficients(lines: LineList, constants: Constants | None = None,
                     with_uncertainties: bool = True) -> DispersionSet:
    """All seven C_k^(i) for a homonuclear pair sharing ``lines``."""
    c = constants or load_constants()
    if len(lines) == 0:
        raise ValueError("empty line list")
    tj = lines.ground_j.twice_j
    h = h_matrix(lines, lines, c).values
    values = {key: float(np.sum(_weights(tj, key[0], *lk) * h)) for key, lk in OPERATORS.items()}
    if not with_uncertainties:
        return DispersionSet(lines.species, tj, values)
    u, corr, cov = propagate_uncertainties(lines, c)
    return DispersionSet(lines.species, tj, values, u, corr, cov)


def _correlation(cov: np.ndarray) -> np.ndarray:
    keys = list(OPERATORS)
    idx = [keys.index(k) for k in INDEPENDENT]
    sub = cov[np.ix_(idx, idx)]
    sd = np.sqrt(np.diag(sub))
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = sub / np.outer(sd, sd)
    corr[~np.isfinite(corr)] = 0.0
    np.fill_diagonal(corr, 1.0)
    return np.clip(corr, -1.0, 1.0)


def propagate_uncertainties(lines: LineList, constants: Constants | None = None):
    """First-order propagation of independent line-strength uncertainties.

    Transition-energy uncertainties are neglected.  Returns (u, corr, cov)
    with ``u`` keyed by (k, i), ``corr`` over INDEPENDENT and ``cov`` 7x7.
    """
    c = constants or load_constants()
    d_sq, rel_u, forms = _coefficient_matrices(lines, c)
    u_s = d_sq * rel_u
    jac = np.array([(q + q.T) @ d_sq for q in forms.values()])
    cov = (jac * u_s**2) @ jac.T
    u = {key: float(math.sqrt(max(cov[n, n], 0.0))) for n, key in enumerate(OPERATORS)}
    return u, _correlation(cov), cov


def monte_carlo_uncertainties(lines: LineList, samples: int = 100_000, seed: int | None = 0,
                              constants: Constants | None = None, chunk: int = 20_000):
    """Resample every line strength from an independent normal distribution.

    Returns (u, corr) in the same layout as :func:`propagate_uncertainties`.
    """
    c = constants or load_constants()
    d_sq, rel_u, forms = _coefficient_matrices(lines, c)
    rng = np.random.default_rng(seed)
    keys = list(OPERATORS)
    draws = []
    remaining = samples
    while remaining > 0:
        n = min(chunk, remaining)
        s = d_sq * (1.0 + rel_u * rng.standard_normal((n, len(d_sq))))
        draws.append(np.column_stack([np.einsum("ni,ij,nj->n", s, forms[k], s) for k in keys]))
        remaining -= n
    sample = np.vstack(draws)
    cov = np.cov(sample, rowvar=False)
    u = {key: float(math.sqrt(cov[n, n])) for n, key in enumerate(keys)}
    return u, _correlation(cov)


def gaussian_uncertainties(lines: LineList, constants: Constants | None = None):
    """Exact covariance of the coefficients for normally distributed line strengths.

    Each C is a quadratic form s^T Q s, so with s ~ N(mu, S)
    cov(C_a, C_b) = 2 tr(Qa S Qb S) + mu^T (Qa + Qa^T) S (Qb + Qb^T) mu.
    The second term alone is the linear result; the first matters when a line
    carries a relative uncertainty near or above one.
    """
    c = constants or load_constants()
    d_sq, rel_u, forms = _coefficient_matrices(lines, c)
    var = (d_sq * rel_u) ** 2
    sym = [0.5 * (q + q.T) for q in forms.values()]
    grads = [2.0 * (a @ d_sq) for a in sym]
    n = len(sym)
    cov = np.empty((n, n))
    for a in range(n):
        for b in range(a, n):
            quad = 2.0 * np.sum((sym[a] * var[None, :]) * (sym[b] * var[None, :]).T)
            cov[a, b] = cov[b, a] = quad + grads[a] @ (var * grads[b])
    u = {key: float(math.sqrt(cov[m, m])) for m, key in enumerate(OPERATORS)}
    return u, _correlation(cov), cov


def long_range_extras(species: str, constants: Constants | None = None) -> dict[str, float]:
    """Magnetic dipole (E_h a0^3) and electric quadrupole (E_h a0^5) strengths.

    ``d2_2`` adds D/R^3 to the (2,2) strength, ``q4_1`` adds Q/R^5 to (4,1).
    """
    c = constants or load_constants()
    atom = c.atom(species)
    j = atom.j
    d22 = -math.sqrt(6.0) * c.fine_structure**2 * (atom.g_j / 2.0) ** 2
    if atom.quadrupole_ea02 == 0.0 or atom.twice_j < 2:
        q41 = 0.0
    else:
        q41 = 6.0 * math.sqrt(70.0) * atom.quadrupole_ea02**2 / (j**2 * (2 * j - 1) ** 2)
    return {"d2_2": d22, "q4_1": q41}
