"""Spin-tensor expansion of the interaction between two identical ground-state atoms.

The interaction at fixed internuclear vector R is

    V(R) = sum_ki V_k^(i)(R) sum_q (-1)^q T_kq^(i) C_{k,-q}(R_hat),

and with R_hat along the body-fixed z axis only T_k0 survives.  The pair basis
is |j W1>|j W2> + eps*sigma |j W2>|j W1> with eps = (-1)^(2j) and sigma = +1
(gerade) or -1 (ungerade).  Only W = W1 + W2 >= 0 is kept since +-W are
degenerate.  Projections are stored doubled, like every angular momentum here.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

from .constants import load_constants, normalize_species
from .wigner import clebsch_gordan, spherical_components

__all__ = [
    "OPERATOR_KEYS",
    "PairState",
    "SymmetrizedPairBasis",
    "AdiabatLabel",
    "AdiabatSet",
    "StrengthSet",
    "FitResult",
    "build_basis",
    "product_operator",
    "operator_matrix",
    "adiabats",
    "model_energy",
    "first_order_splitting",
    "fit_strengths",
    "relativistic_potentials",
    "read_adiabat_csv",
    "write_adiabat_csv",
    "write_strengths_csv",
]

OPERATOR_KEYS: tuple[tuple[int, int], ...] = ((0, 1), (2, 1), (0, 2), (2, 2), (0, 3), (2, 3), (4, 1))
# single-atom ranks (l1, l2) for each (k, i); (2,1) is symmetrized over the two atoms
_RANKS = {
    (0, 1): ((0, 0),),
    (2, 1): ((2, 0), (0, 2)),
    (0, 2): ((1, 1),),
    (2, 2): ((1, 1),),
    (0, 3): ((2, 2),),
    (2, 3): ((2, 2),),
    (4, 1): ((2, 2),),
}


def _check_key(key) -> tuple[int, int]:
    key = tuple(int(x) for x in key)
    if key not in _RANKS:
        raise ValueError(f"unknown spin-tensor operator (k, i) = {key}; expected one of {OPERATOR_KEYS}")
    return key


@dataclass(frozen=True)
class PairState:
    """One symmetrized pair state.  ``t1``/``t2`` are 2*W1 and 2*W2 with t1 >= t2."""

    t1: int
    t2: int
    sigma: str
    reflection: str | None
    norm: float

    @property
    def omega(self) -> int:
        return (self.t1 + self.t2) // 2

    @property
    def omega1(self) -> float:
        return self.t1 / 2

    @property
    def omega2(self) -> float:
        return self.t2 / 2

    @property
    def block(self) -> tuple[int, str, str | None]:
        return (self.omega, self.sigma, self.reflection)


def _fmt_proj(t: int) -> str:
    return str(t // 2) if t % 2 == 0 else f"{t}/2"


@dataclass(frozen=True)
class SymmetrizedPairBasis:
    species: str
    twice_j: int
    states: tuple[PairState, ...]
    vectors: np.ndarray  # product-space columns, shape ((2j+1)^2, n_states)
    include_negative: bool = False

    def __len__(self):
        return len(self.states)

    @property
    def j(self) -> float:
        return self.twice_j / 2

    @property
    def epsilon(self) -> int:
        return -1 if self.twice_j % 2 else 1

    def count(self, sigma: str | None = None) -> int:
        return sum(1 for s in self.states if sigma is None or s.sigma == sigma)

    def blocks(self) -> dict[tuple, np.ndarray]:
        """Block key (W, sigma, +-) -> indices of its states, in basis order."""
        out: dict[tuple, list[int]] = {}
        for n, s in enumerate(self.states):
            out.setdefault(s.block, []).append(n)
        return {k: np.array(v) for k, v in out.items()}

    def stretched_index(self) -> int:
        for n, s in enumerate(self.states):
            if s.t1 == s.t2 == self.twice_j:
                return n
        raise RuntimeError("basis has no spin-stretched state")

    def describe(self, n: int) -> str:
        s = self.states[n]
        return f"|{_fmt_proj(s.t1)},{_fmt_proj(s.t2)}>{s.sigma}"


def _proj_index(tj: int, tm: int) -> int:
    return (tj - tm) // 2


def build_basis(species: str, include_negative: bool = False) -> SymmetrizedPairBasis:
    """Symmetrized pair basis ordered by (W, g before u, W1 descending).

    By default only W >= 0 is kept; ``include_negative`` spans the whole
    (2j+1)^2 product space.
    """
    species = normalize_species(species)
    tj = load_constants().atom(species).twice_j
    return _basis_for(species, tj, include_negative)


@lru_cache(maxsize=16)
def _basis_for(species: str, tj: int, include_negative: bool = False) -> SymmetrizedPairBasis:
    eps = -1 if tj % 2 else 1
    dim = tj + 1
    states, cols = [], []
    for tw in range(-2 * tj if include_negative else 0, 2 * tj + 1, 2):
        for sigma in ("g", "u"):
            sgn = 1 if sigma == "g" else -1
            for t1 in range(tj, -tj - 1, -2):
                t2 = tw - t1
                if t2 > t1 or abs(t2) > tj:
                    continue
                if t1 == t2 and eps * sgn != 1:
                    continue  # the combination vanishes identically
                vec = np.zeros(dim * dim)
                a = _proj_index(tj, t1) * dim + _proj_index(tj, t2)
                b = _proj_index(tj, t2) * dim + _proj_index(tj, t1)
                if t1 == t2:
                    vec[a] = 1.0
                    norm = 1.0
                else:
                    norm = 1.0 / math.sqrt(2.0)
                    vec[a] = norm
                    vec[b] = eps * sgn * norm
                refl = ("+" if sgn > 0 else "-") if tw == 0 else None
                states.append(PairState(t1, t2, sigma, refl, norm))
                cols.append(vec)
    return SymmetrizedPairBasis(species, tj, tuple(states), np.array(cols).T, include_negative)


@lru_cache(maxsize=32)
def _single_atom(tj: int, l: int) -> dict[int, np.ndarray]:
    """Rank-l operator components on one atom: identity, J, [J x J]_2."""
    if l == 0:
        return {0: np.eye(tj + 1)}
    jq = spherical_components(tj)
    if l == 1:
        return jq
    out = {}
    for q in range(-2, 3):
        m = np.zeros((tj + 1, tj + 1))
        for q1 in (-1, 0, 1):
            q2 = q - q1
            if abs(q2) <= 1:
                m += clebsch_gordan(2, 2, 2 * q1, 2 * q2, 4, 2 * q) * jq[q1] @ jq[q2]
        out[q] = m
    return out


@lru_cache(maxsize=256)
def _product_operator(tj: int, k: int, i: int, q: int) -> np.ndarray:
    dim = (tj + 1) ** 2
    out = np.zeros((dim, dim))
    for l1, l2 in _RANKS[(k, i)]:
        a, b = _single_atom(tj, l1), _single_atom(tj, l2)
        for q1 in range(-l1, l1 + 1):
            q2 = q - q1
            if abs(q2) > l2:
                continue
            c = clebsch_gordan(2 * l1, 2 * l2, 2 * q1, 2 * q2, 2 * k, 2 * q)
            if c:
                out += c * np.kron(a[q1], b[q2])
    out.flags.writeable = False
    return out


def product_operator(tj: int, key, q: int = 0) -> np.ndarray:
    """T_kq^(i) in the uncoupled |W1>|W2> basis (projections descending), units hbar^n."""
    k, i = _check_key(key)
    if abs(q) > k:
        raise ValueError(f"|q| = {abs(q)} exceeds rank {k}")
    return _product_operator(tj, k, i, q)


def operator_matrix(k: int, i: int, basis: SymmetrizedPairBasis) -> np.ndarray:
    """Body-frame matrix of the (k, i) operator over ``basis``."""
    key = _check_key((k, i))
    return _basis_operator(basis.species, basis.twice_j, basis.include_negative, key)


@lru_cache(maxsize=64)
def _basis_operator(species: str, tj: int, include_negative: bool, key) -> np.ndarray:
    basis = _basis_for(species, tj, include_negative)
    if key == (0, 1):
        m = np.eye(len(basis))
        m.flags.writeable = False
        return m
    u = basis.vectors
    m = u.T @ _product_operator(tj, key[0], key[1], 0) @ u
    m = 0.5 * (m + m.T)
    # symmetry makes every element between different (W, sigma, +-) blocks vanish
    same = np.zeros_like(m, dtype=bool)
    for members in basis.blocks().values():
        same[np.ix_(members, members)] = True
    m[~same | (np.abs(m) < 1e-14 * max(1.0, np.abs(m).max()))] = 0.0
    m.flags.writeable = False
    return m


def model_energy(omega1: float, omega2: float, v0: float, v2: float, j: float) -> float:
    """Two-tensor energy V0 + V2 [3(W1^2 + W2^2) - 2j(j+1)]/sqrt(6)."""
    if abs(omega1) > j or abs(omega2) > j:
        raise ValueError("projection exceeds j")
    return v0 + v2 * (3.0 * (omega1**2 + omega2**2) - 2.0 * j * (j + 1)) / math.sqrt(6.0)


def first_order_splitting(omega1: float, omega2: float, v02: float, v22: float) -> float:
    """Diagonal shift from the (0,2) and (2,2) operators, (-V02/sqrt3 + 2 V22/sqrt6) W1 W2.

    This is the j1z j2z part only.  For pairs with |W1 - W2| = 1 the exchange
    term j1+ j2- links the state to its own partner and adds a shift of the
    same order, so those diagonal elements differ from this value.
    """
    return (-v02 / math.sqrt(3.0) + 2.0 * v22 / math.sqrt(6.0)) * omega1 * omega2


@dataclass
class StrengthSet:
    """Strengths V_k^(i) in cm^-1, each a constant or a callable of R (a0)."""

    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.terms = {_check_key(k): v for k, v in dict(self.terms).items()}

    def at(self, r: float) -> dict[tuple[int, int], float]:
        return {k: float(v(r)) if callable(v) else float(v) for k, v in self.terms.items()}

    @classmethod
    def coerce(cls, obj) -> "StrengthSet":
        if isinstance(obj, cls):
            return obj
        if hasattr(obj, "as_strength_set"):
            return obj.as_strength_set()
        return cls(dict(obj))


@dataclass(frozen=True, order=True)
class AdiabatLabel:
    n: int
    omega: int
    sigma: str
    reflection: str | None = None

    @property
    def block(self):
        return (self.omega, self.sigma, self.reflection)

    def __str__(self):
        return f"{self.n}:{self.omega}{self.sigma}{self.reflection or ''}"

    @classmethod
    def parse(cls, text: str) -> "AdiabatLabel":
        """Inverse of ``str``: '3:0g+' or '1:12g'."""
        n, rest = text.strip().split(":")
        refl = rest[-1] if rest[-1] in "+-" else None
        if refl:
            rest = rest[:-1]
        return cls(int(n), int(rest[:-1]), rest[-1], refl)


@dataclass
class AdiabatSet:
    """Adiabatic potentials on an R grid; ``energies[r, s]`` belongs to ``labels[s]``."""

    basis: SymmetrizedPairBasis
    r: np.ndarray
    labels: list[AdiabatLabel]
    energies: np.ndarray
    vectors: np.ndarray  # (n_r, n_basis, n_states); column s is the state of labels[s]

    def index(self, label: AdiabatLabel) -> int:
        return self.labels.index(label)

    def curve(self, label: AdiabatLabel) -> np.ndarray:
        return self.energies[:, self.index(label)]

    def lowest(self, ir: int = 0) -> AdiabatLabel:
        return self.labels[int(np.argmin(self.energies[ir]))]

    def to_data(self) -> dict[float, dict[AdiabatLabel, float]]:
        return {float(r): dict(zip(self.labels, e)) for r, e in zip(self.r, self.energies)}


def _canonical_block_eig(h: np.ndarray, tol: float):
    """Eigenpairs with a deterministic basis inside degenerate clusters."""
    w, v = np.linalg.eigh(h)
    out_v = np.empty_like(v)
    start = 0
    n = len(w)
    while start < n:
        stop = start + 1
        while stop < n and w[stop] - w[start] <= tol:
            stop += 1
        sub = v[:, start:stop]
        if stop - start > 1:
            # Gram-Schmidt of the cluster projector applied to basis vectors in order
            proj = sub @ sub.T
            cols = []
            for e in range(proj.shape[0]):
                c = proj[:, e].copy()
                for prev in cols:
                    c -= (prev @ c) * prev
                nc = np.linalg.norm(c)
                if nc > 1e-8:
                    cols.append(c / nc)
                if len(cols) == stop - start:
                    break
            sub = np.array(cols).T
            w[start:stop] = np.mean(w[start:stop])
        for c in range(sub.shape[1]):
            col = sub[:, c]
            lead = np.flatnonzero(np.abs(col) > 1e-10)
            if lead.size and col[lead[0]] < 0:
                sub[:, c] = -col
        out_v[:, start:stop] = sub
        start = stop
    return w, out_v


def _labels_for(basis: SymmetrizedPairBasis) -> tuple[list[AdiabatLabel], list[np.ndarray]]:
    labels, idx = [], []
    for key, members in sorted(basis.blocks().items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2] or "")):
        for n in range(len(members)):
            labels.append(AdiabatLabel(n + 1, *key))
        idx.append(members)
    return labels, idx


def _hamiltonian(basis: SymmetrizedPairBasis, values: Mapping) -> np.ndarray:
    h = np.zeros((len(basis), len(basis)))
    for key, v in values.items():
        if v:
            h += v * operator_matrix(*key, basis)
    return h


def adiabats(strengths, r, basis: SymmetrizedPairBasis | str | None = None) -> AdiabatSet:
    """Diagonalize the spin-tensor interaction block by block at each R.

    ``strengths`` is a StrengthSet, a mapping (k, i) -> value or callable, or an
    object providing ``as_strength_set``.  Degenerate eigenvalues are ordered by
    Gram-Schmidt on the block basis, so n-labels are reproducible.
    """
    if basis is None:
        basis = getattr(strengths, "species", None)
        if basis is None:
            raise ValueError("a basis or species is needed")
    if isinstance(basis, str):
        basis = build_basis(basis)
    sset = StrengthSet.coerce(strengths)
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    labels, idx = _labels_for(basis)
    nb = len(basis)
    energies = np.empty((len(rs), nb))
    vectors = np.zeros((len(rs), nb, nb))
    for ir, rv in enumerate(rs):
        vals = sset.at(rv)
        h = _hamiltonian(basis, vals)
        scale = max(1.0, max((abs(x) for x in vals.values()), default=1.0))
        col = 0
        for members in idx:
            w, v = _canonical_block_eig(h[np.ix_(members, members)], 1e-11 * scale)
            sl = slice(col, col + len(members))
            energies[ir, sl] = w
            vectors[ir][np.ix_(members, np.arange(col, col + len(members)))] = v
            col += len(members)
    return AdiabatSet(basis, rs, labels, energies, vectors)


# --- fitting -----------------------------------------------------------------


@dataclass
class FitResult:
    """Per-R fitted strengths.  Missing or dropped parameters are NaN in ``u``."""

    species: str
    r: np.ndarray
    values: dict
    u: dict
    chi2_nu: np.ndarray
    n_data: np.ndarray
    dropped: list
    constraint: bool

    def strength_set(self, ir: int) -> StrengthSet:
        return StrengthSet({k: v[ir] for k, v in self.values.items()})

    def to_json(self) -> dict:
        return {
            "species": self.species,
            "constraint": self.constraint,
            "rows": [
                {
                    "r_bohr": float(self.r[n]),
                    "chi2_nu": float(self.chi2_nu[n]),
                    "n_data": int(self.n_data[n]),
                    "dropped": [list(k) for k in self.dropped[n]],
                    **{f"V_{k}_{i}": float(self.values[(k, i)][n]) for (k, i) in self.values},
                    **{f"u_V_{k}_{i}": float(self.u[(k, i)][n]) for (k, i) in self.u},
                }
                for n in range(len(self.r))
            ],
        }


def _independent_columns(x: np.ndarray, rtol: float = 1e-9) -> list[int]:
    """Greedy selection of columns in order, keeping those that raise the rank."""
    keep: list[int] = []
    if x.size == 0:
        return keep
    scale = max(np.linalg.norm(x, axis=0).max(), 1e-300)
    for c in range(x.shape[1]):
        trial = x[:, keep + [c]]
        s = np.linalg.svd(trial, compute_uv=False)
        if len(s) == len(keep) + 1 and s[-1] > rtol * scale:
            keep.append(c)
    return keep


class _BlockModel:
    """Eigenvalues of sum_p theta_p M_p for the labelled states, with derivatives."""

    def __init__(self, basis, keys, labels):
        self.keys = list(keys)
        blocks = basis.blocks()
        self.blocks = {}
        self.rows: dict = {}
        for key, members in blocks.items():
            mats = [operator_matrix(*k, basis)[np.ix_(members, members)] for k in self.keys]
            self.blocks[key] = (members, mats)
        for n, lab in enumerate(labels):
            if lab.block not in blocks:
                raise ValueError(f"label {lab} has no block in the {basis.species} basis")
            if not 1 <= lab.n <= len(blocks[lab.block]):
                raise ValueError(f"label {lab}: n out of range")
            self.rows.setdefault(lab.block, []).append((n, lab.n - 1))
        self.n = len(labels)

    def __call__(self, theta):
        lam = np.empty(self.n)
        jac = np.empty((self.n, len(self.keys)))
        for key, rows in self.rows.items():
            members, mats = self.blocks[key]
            h = np.zeros((len(members), len(members)))
            for t, m in zip(theta, mats):
                h += t * m
            w, v = np.linalg.eigh(h)
            for n, pos in rows:
                lam[n] = w[pos]
                vec = v[:, pos]
                jac[n] = [vec @ m @ vec for m in mats]
        return lam, jac

    def first_order(self, basis, ordering_sign: float):
        """Diagonal-element design matrix with states ordered by sign * diag(M_21)."""
        d21 = np.diag(operator_matrix(2, 1, basis))
        x = np.empty((self.n, len(self.keys)))
        for key, rows in self.rows.items():
            members, mats = self.blocks[key]
            order = np.argsort(ordering_sign * d21[members], kind="stable")
            for n, pos in rows:
                s = order[pos]
                x[n] = [m[s, s] for m in mats]
        return x


def fit_strengths(
    data,
    species: str | None = None,
    active: Iterable = ((0, 1), (2, 1)),
    constraint: bool = True,
    u: float = 10.0,
) -> FitResult:
    """Least-squares spin-tensor strengths from labelled adiabatic potentials.

    ``data`` maps R -> {AdiabatLabel: energy in cm^-1} (an AdiabatSet is accepted
    too).  Residuals are splittings from the spin-stretched state, each with
    the same uncorrelated uncertainty ``u``.  With ``constraint`` on, V_0^(1) is
    not fitted but set so the spin-stretched state reproduces its own energy.
    The model is nonlinear once the weak operators mix states, so the solution
    is refined by Gauss-Newton with Hellmann-Feynman derivatives starting from a
    first-order (diagonal) linear fit.
    """
    if isinstance(data, AdiabatSet):
        species = species or data.basis.species
        data = data.to_data()
    if species is None:
        raise ValueError("species is required")
    basis = build_basis(species)
    tj = basis.twice_j
    ss_label = AdiabatLabel(1, tj, "g" if basis.epsilon > 0 else "u", None)
    active = [_check_key(k) for k in active]
    if constraint and (0, 1) not in active:
        active = [(0, 1)] + active
    fit_keys = [k for k in active if not (constraint and k == (0, 1))]

    rs = sorted(float(r) for r in data)
    values = {k: np.full(len(rs), np.nan) for k in active}
    errs = {k: np.full(len(rs), np.nan) for k in active}
    chi2 = np.full(len(rs), np.nan)
    ndata = np.zeros(len(rs), dtype=int)
    dropped_all = []
    for ir, rv in enumerate(rs):
        point = {(AdiabatLabel.parse(k) if isinstance(k, str) else k): float(e) for k, e in data[rv].items()}
        if ss_label not in point:
            raise ValueError(f"R={rv}: spin-stretched state {ss_label} missing from the data")
        e_ss = point[ss_label]
        if constraint:
            labels = [lab for lab in sorted(point) if lab != ss_label]
            y = np.array([point[lab] - e_ss for lab in labels])
        else:
            labels = sorted(point)
            y = np.array([point[lab] for lab in labels])
        model = _BlockModel(basis, fit_keys, labels + ([ss_label] if constraint else []))

        def evaluate(theta, model=model):
            lam, jac = model(theta)
            if constraint:
                return lam[:-1] - lam[-1], jac[:-1] - jac[-1]
            return lam, jac

        def design(sign, model=model):
            x = model.first_order(basis, sign)
            return x[:-1] - x[-1] if constraint else x

        best = None
        for sign in (1.0, -1.0):
            x = design(sign)
            keep = _independent_columns(x)
            theta0 = np.zeros(len(fit_keys))
            if keep:
                theta0[keep] = np.linalg.lstsq(x[:, keep], y, rcond=None)[0]
            theta = theta0
            if keep and np.any(np.abs(evaluate(theta0)[0] - y) > 1e-13 * max(1.0, np.abs(y).max())):
                def resid(t, keep=keep):
                    full = np.zeros(len(fit_keys))
                    full[keep] = t
                    return evaluate(full)[0] - y

                def jac(t, keep=keep):
                    full = np.zeros(len(fit_keys))
                    full[keep] = t
                    return evaluate(full)[1][:, keep]

                sol = least_squares(resid, theta0[keep], jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
                theta = np.zeros(len(fit_keys))
                theta[keep] = sol.x
            r_final, j_final = evaluate(theta)
            cost = float(np.sum((r_final - y) ** 2))
            if best is None or cost < best[0] - 1e-12 * max(1.0, cost):
                best = (cost, theta, keep, j_final)
        cost, theta, keep, jmat = best
        ndata[ir] = len(y)
        dof = len(y) - len(keep)
        chi2[ir] = cost / u**2 / dof if dof > 0 else np.nan
        cov = np.full((len(fit_keys), len(fit_keys)), np.nan)
        if keep:
            jk = jmat[:, keep]
            cov_k = u**2 * np.linalg.inv(jk.T @ jk)
            cov[np.ix_(keep, keep)] = cov_k
        for c, key in enumerate(fit_keys):
            values[key][ir] = theta[c] if c in keep else 0.0
            errs[key][ir] = math.sqrt(cov[c, c]) if c in keep else np.nan
        if constraint:
            # V01 = V_ss - sum theta <ss|M|ss>; the stretched state is alone in its block
            d_ss = np.array([operator_matrix(*k, basis)[basis.stretched_index(), basis.stretched_index()] for k in fit_keys])
            values[(0, 1)][ir] = e_ss - float(theta @ d_ss)
            if keep:
                g = d_ss[keep]
                errs[(0, 1)][ir] = math.sqrt(float(g @ cov[np.ix_(keep, keep)] @ g))
            else:
                errs[(0, 1)][ir] = 0.0
        dropped_all.append([fit_keys[c] for c in range(len(fit_keys)) if c not in keep])
    return FitResult(basis.species, np.array(rs), values, errs, chi2, ndata, dropped_all, constraint)


# --- ingestion and emission --------------------------------------------------

ADIABAT_HEADER = ("r_bohr", "n", "omega", "sigma", "reflection", "energy_cm")


def read_adiabat_csv(path) -> dict[float, dict[AdiabatLabel, float]]:
    """Rows of (R, n, W, g|u, +|-|empty, energy) grouped by R."""
    path = Path(path)
    out: dict[float, dict[AdiabatLabel, float]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, skipinitialspace=True)
        missing = set(ADIABAT_HEADER) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                sigma = row["sigma"].strip()
                refl = row["reflection"].strip() or None
                if sigma not in ("g", "u") or refl not in (None, "+", "-"):
                    raise ValueError("bad symmetry label")
                lab = AdiabatLabel(int(row["n"]), int(row["omega"]), sigma, refl)
                out.setdefault(float(row["r_bohr"]), {})[lab] = float(row["energy_cm"])
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return out


def write_adiabat_csv(path, data) -> None:
    if isinstance(data, AdiabatSet):
        data = data.to_data()
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(ADIABAT_HEADER)
        for r in sorted(data):
            for lab in sorted(data[r]):
                w.writerow([repr(float(r)), lab.n, lab.omega, lab.sigma, lab.reflection or "", repr(float(data[r][lab]))])


def relativistic_potentials(raw, v_ss: Callable[[float], float] | Mapping, species: str):
    """Anchor raw relativistic energies U to the spin-stretched potential.

    V(R; s) = V_ss(R) + U(R; s) - U(R; stretched), which keeps every splitting
    from the stretched state as computed.
    """
    basis = build_basis(species)
    ss_label = AdiabatLabel(1, basis.twice_j, "g" if basis.epsilon > 0 else "u", None)
    out = {}
    for r, states in raw.items():
        if ss_label not in states:
            raise ValueError(f"R={r}: spin-stretched state missing")
        anchor = v_ss(r) if callable(v_ss) else v_ss[r]
        out[r] = {lab: anchor + e - states[ss_label] for lab, e in states.items()}
    return out


def write_strengths_csv(path, fit: FitResult) -> None:
    keys = [k for k in OPERATOR_KEYS if k in fit.values]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        header = ["r_bohr"]
        for k, i in keys:
            header += [f"V_{k}_{i}", f"u_V_{k}_{i}"]
        w.writerow(header + ["chi2_nu"])
        for n, r in enumerate(fit.r):
            row = [repr(float(r))]
            for key in keys:
                row += [repr(float(fit.values[key][n])), repr(float(fit.u[key][n]))]
            w.writerow(row + [repr(float(fit.chi2_nu[n]))])
