"""Coupled-channel rovibrational levels of the homonuclear dimer.

Channels are |(j_el l) J M> where j_el couples the two atomic j and l is the
partial wave.  The radial coordinate is discretized with the Colbert-Miller
DVR for the half line.  Energies are in cm^-1 relative to two ground-state
atoms, R in a0 and masses in electron masses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

from . import curves as _curves
from .constants import load_constants, normalize_species
from .spintensor import AdiabatLabel, _RANKS, _check_key, adiabats, build_basis
from .wigner import clebsch_gordan, reduced_j, reduced_jj2, wigner_3j, wigner_6j, wigner_9j

__all__ = [
    "Channel",
    "DvrGrid",
    "BoundLevel",
    "LevelSet",
    "allowed_blocks",
    "build_channels",
    "coupling_matrix",
    "dvr_kinetic",
    "hamiltonian",
    "solve_block",
    "bound_levels",
    "single_channel_levels",
    "decoupled_levels",
    "lowest_adiabat",
    "lowest_adiabat_minimum",
    "spectroscopic_constants",
    "convergence_report",
    "DEFAULT_GRID",
]

DEFAULT_GRID = (6.5, 30.0, 350)
MODELS = ("two_tensor", "full")
TWO_TENSOR = ((0, 1), (2, 1))


@dataclass(frozen=True, order=True)
class Channel:
    j_el: int
    l: int
    J: int

    @property
    def inversion(self) -> str:
        return "g" if self.j_el % 2 == 0 else "u"

    @property
    def l_parity(self) -> str:
        return "even" if self.l % 2 == 0 else "odd"

    def __str__(self):
        return f"(j_el={self.j_el},l={self.l})J={self.J}"


def allowed_blocks(species: str) -> list[tuple[str, str]]:
    """Symmetry blocks (inversion, l parity) of physical states.

    168Er has no nuclear spin, so exchange symmetry keeps only gerade/even-l and
    ungerade/odd-l.  169Tm (nuclear spin 1/2) populates all four.
    """
    species = normalize_species(species)
    if species == "Er":
        return [("g", "even"), ("u", "odd")]
    return [("g", "even"), ("g", "odd"), ("u", "even"), ("u", "odd")]


def _check_block(inversion: str, l_parity: str):
    if inversion not in ("g", "u") or l_parity not in ("even", "odd"):
        raise ValueError(f"bad symmetry block ({inversion!r}, {l_parity!r})")


def build_channels(J: int, inversion: str, l_parity: str, species: str) -> list[Channel]:
    """All (j_el, l) with |j_el - l| <= J <= j_el + l in the requested block."""
    if J < 0 or int(J) != J:
        raise ValueError(f"J must be a non-negative integer, got {J}")
    _check_block(inversion, l_parity)
    tj = load_constants().atom(species).twice_j
    want_j = 0 if inversion == "g" else 1
    want_l = 0 if l_parity == "even" else 1
    out = []
    for j_el in range(want_j, tj + 1, 2):
        for l in range(abs(J - j_el), J + j_el + 1):
            if l % 2 == want_l:
                out.append(Channel(j_el, l, int(J)))
    return out


def _single_reduced(tj: int, l: int) -> float:
    if l == 0:
        return math.sqrt(tj + 1)
    if l == 1:
        return reduced_j(tj)
    return reduced_jj2(tj)


@lru_cache(maxsize=4096)
def _electronic_reduced(tj: int, key: tuple[int, int], jel_p: int, jel: int) -> float:
    """<(j j) j_el'|| T_k^(i) || (j j) j_el> by 9j recoupling."""
    k = key[0]
    if (jel_p - jel) % 2:
        # every operator is symmetric under atom exchange, which fixes the parity of j_el
        return 0.0
    total = 0.0
    for l1, l2 in _RANKS[key]:
        nine = wigner_9j(tj, tj, 2 * jel_p, tj, tj, 2 * jel, 2 * l1, 2 * l2, 2 * k)
        if nine:
            total += math.sqrt((2 * jel_p + 1) * (2 * jel + 1) * (2 * k + 1)) * nine \
                * _single_reduced(tj, l1) * _single_reduced(tj, l2)
    return total


@lru_cache(maxsize=4096)
def _orbital_reduced(lp: int, k: int, l: int) -> float:
    """<l'||C_k||l>."""
    three = wigner_3j(2 * lp, 2 * k, 2 * l, 0, 0, 0)
    if not three:
        return 0.0
    return (-1) ** lp * math.sqrt((2 * lp + 1) * (2 * l + 1)) * three


def coupling_matrix(k: int, i: int, channels, species: str) -> np.ndarray:
    """Angular matrix G of sum_q (-1)^q T_kq^(i) C_{k,-q}(R_hat) over ``channels``."""
    key = _check_key((k, i))
    chans = list(channels)
    if len({c.J for c in chans}) > 1:
        raise ValueError("channels belong to different J blocks")
    tj = load_constants().atom(species).twice_j
    n = len(chans)
    g = np.zeros((n, n))
    for a, cp in enumerate(chans):
        for b, c in enumerate(chans):
            if b < a:
                continue
            six = wigner_6j(2 * c.J, 2 * cp.l, 2 * cp.j_el, 2 * k, 2 * c.j_el, 2 * c.l)
            if not six:
                continue
            orb = _orbital_reduced(cp.l, k, c.l)
            if not orb:
                continue
            el = _electronic_reduced(tj, key, cp.j_el, c.j_el)
            phase = -1.0 if (c.J + c.j_el + cp.l) % 2 else 1.0
            g[a, b] = g[b, a] = phase * six * el * orb
    return g


@dataclass(frozen=True)
class DvrGrid:
    """Uniform grid R_m = (i0 + m) dR, m = 0..n-1, on the half line (0, inf).

    ``i0`` and ``dR`` are chosen so the last point is exactly ``r_max`` and the
    first lies as close to ``r_min`` as the integer offset allows.
    """

    r_min: float
    r_max: float
    n: int
    mu: float

    def __post_init__(self):
        if self.n < 50:
            raise ValueError("DVR grid needs at least 50 points")
        if not 0 < self.r_min < self.r_max:
            raise ValueError("need 0 < r_min < r_max")
        if self.mu <= 0:
            raise ValueError("reduced mass must be positive")

    @classmethod
    def for_species(cls, species: str, r_min=DEFAULT_GRID[0], r_max=DEFAULT_GRID[1], n=DEFAULT_GRID[2]):
        return cls(float(r_min), float(r_max), int(n), load_constants().reduced_mass_au(species))

    @property
    def i0(self) -> int:
        return max(1, round(self.r_min * (self.n - 1) / (self.r_max - self.r_min)))

    @property
    def dr(self) -> float:
        return self.r_max / (self.i0 + self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return (self.i0 + np.arange(self.n)) * self.dr

    def with_mu(self, mu: float) -> "DvrGrid":
        return DvrGrid(self.r_min, self.r_max, self.n, mu)


def dvr_kinetic(grid: DvrGrid) -> np.ndarray:
    """Colbert-Miller kinetic matrix for (0, inf) in hartree, grid indices from the origin."""
    idx = grid.i0 + np.arange(grid.n)
    i, j = np.meshgrid(idx, idx, indexing="ij")
    diff = i - j
    with np.errstate(divide="ignore"):
        off = 2.0 / diff.astype(float) ** 2 - 2.0 / (i + j).astype(float) ** 2
    t = np.where(diff == 0, math.pi**2 / 3.0 - 1.0 / (2.0 * i.astype(float) ** 2), off)
    t *= np.where(diff % 2 == 0, 1.0, -1.0)
    return t / (2.0 * grid.mu * grid.dr**2)


# --- Hamiltonian assembly -----------------------------------------------------


def _strengths(species: str, model: str, strengths=None) -> dict:
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, got {model!r}")
    if strengths is None:
        strengths = _strength_cache(normalize_species(species), model)
    keys = TWO_TENSOR if model == "two_tensor" else tuple(_RANKS)
    return {k: strengths[k] for k in keys if k in strengths}


@lru_cache(maxsize=4)
def _strength_cache(species: str, model: str) -> dict:
    return _curves.strength_set(species, model)


def _radial_terms(grid: DvrGrid, species: str, model: str, strengths=None) -> dict:
    """Potential values on the grid (cm^-1) keyed by (k, i), plus 1/(2 mu R^2)."""
    c = load_constants()
    r = grid.points
    out = {key: np.asarray(f(r), dtype=float) for key, f in _strengths(species, model, strengths).items()}
    out["centrifugal"] = c.hartree_in_cm / (2.0 * grid.mu * r**2)
    return out


def _assemble(channels, species, terms, kin, project=None):
    """H = 1 x T + sum_key G_key x A_key + diag(l(l+1)) x A_cf, channel-major order.

    ``project`` (n_grid x K) contracts every radial operator onto a smaller basis.
    """
    def radial(diag_values):
        if project is None:
            return np.diag(diag_values)
        return project.T @ (diag_values[:, None] * project)

    nc = len(channels)
    t = kin if project is None else project.T @ kin @ project
    h = np.kron(np.eye(nc), t)
    ll = np.array([c.l * (c.l + 1) for c in channels], dtype=float)
    h += np.kron(np.diag(ll), radial(terms["centrifugal"]))
    for key, values in terms.items():
        if key == "centrifugal":
            continue
        g = coupling_matrix(*key, channels, species)
        if np.any(g):
            h += np.kron(g, radial(values))
    return 0.5 * (h + h.T)


def hamiltonian(J: int, inversion: str, l_parity: str, species: str, model: str = "two_tensor",
                grid: DvrGrid | None = None, strengths=None) -> np.ndarray:
    """Dense DVR Hamiltonian (cm^-1) of dimension n_grid * n_channels."""
    species = normalize_species(species)
    grid = grid or DvrGrid.for_species(species)
    channels = build_channels(J, inversion, l_parity, species)
    c = load_constants()
    terms = _radial_terms(grid, species, model, strengths)
    return _assemble(channels, species, terms, dvr_kinetic(grid) * c.hartree_in_cm)


# --- labelling ------------------------------------------------------------------


@dataclass
class BoundLevel:
    energy: float
    J: int
    inversion: str
    l_parity: str
    v: int
    omega_label: str
    omega1_abs: float
    overlap: float
    channel_weights: dict = field(repr=False, default_factory=dict)

    @property
    def block(self) -> str:
        return f"{self.inversion}/{self.l_parity}"

    def top_channels(self, n: int = 3) -> list:
        return sorted(self.channel_weights.items(), key=lambda kv: -kv[1])[:n]


@dataclass
class LevelSet:
    """Levels of one (J, block) plus the radial grid they were computed on."""

    species: str
    model: str
    J: int
    inversion: str
    l_parity: str
    channels: list
    energies: np.ndarray
    wavefunctions: np.ndarray  # (n_channels, n_grid, n_levels) on the DVR points
    grid: DvrGrid
    solver: str


def _body_frame_map(channels, tj: int) -> tuple[np.ndarray, list]:
    """Matrix taking channel amplitudes to product-space amplitudes |W1>|W2> for each W.

    Returns B of shape ((2j+1)^2 * n_omega, n_channels) and the list of W
    values; rows are grouped by W.  Uses
    <J W; j_el W | (j_el l) J> = sqrt((2l+1)/(2J+1)) <j_el W l 0 | J W>.
    """
    J = channels[0].J
    dim = tj + 1
    omegas = list(range(-min(J, tj), min(J, tj) + 1))
    blocks = []
    for w in omegas:
        m = np.zeros((dim * dim, len(channels)))
        for col, ch in enumerate(channels):
            if abs(w) > ch.j_el:
                continue
            a = math.sqrt((2 * ch.l + 1) / (2 * J + 1)) * clebsch_gordan(2 * ch.j_el, 2 * ch.l, 2 * w, 0, 2 * J, 2 * w)
            if not a:
                continue
            for t1 in range(tj, -tj - 1, -2):
                t2 = 2 * w - t1
                if abs(t2) > tj:
                    continue
                cg = clebsch_gordan(tj, tj, t1, t2, 2 * ch.j_el, 2 * w)
                if cg:
                    m[((tj - t1) // 2) * dim + (tj - t2) // 2, col] += a * cg
        blocks.append(m)
    return np.vstack(blocks), omegas


@lru_cache(maxsize=16)
def _reference_adiabats(species: str, model: str, r_e: float):
    basis = build_basis(species, include_negative=True)
    strengths = {k: float(f(r_e)) for k, f in _strengths(species, model).items()}
    return adiabats(strengths, [r_e], basis)


def _assign(levelset: LevelSet, r_e: float) -> list[BoundLevel]:
    if not levelset.channels or not len(levelset.energies):
        return []
    tj = load_constants().atom(levelset.species).twice_j
    chans = levelset.channels
    bmap, omegas = _body_frame_map(chans, tj)
    dim = (tj + 1) ** 2
    ref = _reference_adiabats(levelset.species, levelset.model, r_e)
    vecs = ref.basis.vectors @ ref.vectors[0]  # product-space adiabatic vectors
    # group labels that differ only by the sign of W
    groups: dict = {}
    for s, lab in enumerate(ref.labels):
        groups.setdefault((lab.n, abs(lab.omega), lab.sigma, lab.reflection), []).append(s)
    t_abs = np.abs(np.repeat(np.arange(tj, -tj - 1, -2), tj + 1)) / 2.0  # |W1| on product index
    out = []
    for n, energy in enumerate(levelset.energies):
        psi = levelset.wavefunctions[:, :, n]  # (n_channels, n_grid)
        weights = np.sum(psi**2, axis=1)
        weights /= weights.sum()
        body = bmap @ psi  # (dim * n_omega, n_grid)
        body = body.reshape(len(omegas), dim, -1)
        # product-space density integrated over R, per W
        probs = {}
        omega1 = 0.0
        for wi in range(len(omegas)):
            b = body[wi]
            omega1 += float(np.sum(t_abs[:, None] * b**2))
            proj = vecs.T @ b  # (n_states, n_grid)
            for key, members in groups.items():
                probs[key] = probs.get(key, 0.0) + float(np.sum(proj[members] ** 2))
        norm = sum(probs.values())
        best = max(probs, key=probs.get)
        # radial amplitude on the dominant adiabat for node counting
        s_best = [s for s in groups[best] if ref.labels[s].omega >= 0][0]
        w_best = ref.labels[s_best].omega
        if w_best in omegas:
            amp = vecs[:, s_best] @ body[omegas.index(w_best)]
        else:
            amp = np.zeros(psi.shape[1])
        v = _count_nodes(amp)
        lab = AdiabatLabel(best[0], best[1], best[2], best[3])
        out.append(BoundLevel(
            energy=float(energy), J=levelset.J, inversion=levelset.inversion, l_parity=levelset.l_parity,
            v=v, omega_label=str(lab), omega1_abs=omega1 / norm if norm else float("nan"),
            overlap=probs[best] / norm if norm else float("nan"),
            channel_weights={(c.j_el, c.l): float(w) for c, w in zip(chans, weights)},
        ))
    return out


def _count_nodes(amp: np.ndarray, rel: float = 0.02) -> int:
    """Sign changes of ``amp`` ignoring the small-amplitude tails."""
    if not np.any(amp):
        return -1
    cut = rel * np.max(np.abs(amp))
    keep = amp[np.abs(amp) > cut]
    return int(np.sum(np.signbit(keep[1:]) != np.signbit(keep[:-1])))


# --- solvers --------------------------------------------------------------------


def _lowest_two_tensor_curve(species: str, r: np.ndarray) -> np.ndarray:
    """Lowest two-tensor adiabat: V0 + V2 * min over states of diag(M_21)."""
    st = _strengths(species, "two_tensor")
    v0 = np.asarray(st[(0, 1)](r))
    v2 = np.asarray(st[(2, 1)](r))
    tj = load_constants().atom(species).twice_j
    j = tj / 2
    lo = (3.0 * (0.25 if tj % 2 else 0.0) * 2 - 2 * j * (j + 1)) / math.sqrt(6.0)
    hi = (6.0 * j * j - 2 * j * (j + 1)) / math.sqrt(6.0)
    return np.minimum(v0 + v2 * lo, v0 + v2 * hi)


def solve_block(J: int, inversion: str, l_parity: str, species: str, model: str = "two_tensor",
                grid: DvrGrid | None = None, e_max: float = 0.0, solver: str = "auto",
                n_radial: int = 80, strengths=None) -> LevelSet:
    """Eigenvalues below ``e_max`` of one (J, block).

    ``solver`` is 'dense' (full DVR), 'contracted' (the ``n_radial`` lowest
    eigenfunctions of a single-channel reference problem times the channel
    space) or 'auto', which picks dense below 4000 basis functions.
    """
    species = normalize_species(species)
    grid = grid or DvrGrid.for_species(species)
    channels = build_channels(J, inversion, l_parity, species)
    c = load_constants()
    if not channels:
        return LevelSet(species, model, J, inversion, l_parity, channels, np.empty(0),
                        np.empty((0, grid.n, 0)), grid, solver)
    if solver == "auto":
        solver = "dense" if len(channels) * grid.n <= 4000 else "contracted"
    if solver not in ("dense", "contracted"):
        raise ValueError(f"unknown solver {solver!r}")
    terms = _radial_terms(grid, species, model, strengths)
    kin = dvr_kinetic(grid) * c.hartree_in_cm
    project = None
    if solver == "contracted":
        u0 = _lowest_two_tensor_curve(species, grid.points) + J * (J + 1) * terms["centrifugal"]
        k = min(n_radial, grid.n)
        _, project = scipy.linalg.eigh(kin + np.diag(u0), subset_by_index=(0, k - 1))
    h = _assemble(channels, species, terms, kin, project)
    w, v = scipy.linalg.eigh(h, subset_by_value=(-np.inf, e_max), driver="evr")
    nc = len(channels)
    if project is None:
        psi = v.reshape(nc, grid.n, -1)
    else:
        psi = np.einsum("gk,ckn->cgn", project, v.reshape(nc, project.shape[1], -1))
    return LevelSet(species, model, J, inversion, l_parity, channels, w, psi, grid, solver)


def bound_levels(J_values, blocks=None, model: str = "two_tensor", species: str = "Er",
                 grid: DvrGrid | None = None, e_max: float = 0.0, solver: str = "auto",
                 n_radial: int = 80, label: bool = True, max_levels: int | None = None) -> list[BoundLevel]:
    """Labelled levels below ``e_max`` for every J and symmetry block requested."""
    species = normalize_species(species)
    blocks = blocks or allowed_blocks(species)
    r_e = lowest_adiabat_minimum(species, model)[0] if label else None
    out = []
    for J in J_values:
        for inv, lp in blocks:
            ls = solve_block(J, inv, lp, species, model, grid, e_max, solver, n_radial)
            if max_levels is not None:
                ls.energies = ls.energies[:max_levels]
                ls.wavefunctions = ls.wavefunctions[:, :, :max_levels]
            if label:
                out.extend(_assign(ls, r_e))
            else:
                out.extend(BoundLevel(float(e), J, inv, lp, -1, "", float("nan"), float("nan")) for e in ls.energies)
    return sorted(out, key=lambda b: b.energy)


def single_channel_levels(potential, grid: DvrGrid, e_max: float = 0.0) -> np.ndarray:
    """Eigenvalues (cm^-1) of T + V(R) for a single radial channel."""
    c = load_constants()
    h = dvr_kinetic(grid) * c.hartree_in_cm + np.diag(np.asarray(potential(grid.points), dtype=float))
    return scipy.linalg.eigvalsh(h, subset_by_value=(-np.inf, e_max), driver="evr")


def decoupled_levels(species: str, J: int = 0, grid: DvrGrid | None = None, e_max: float = 0.0) -> dict:
    """Per-adiabat 1D levels of the two-tensor J = 0 gerade problem.

    Each W = 0 gerade adiabat |a, -a> is solved on its own, with the diagonal
    centrifugal term <a| j_el(j_el+1) |a> / (2 mu R^2).  The off-diagonal
    part of that term is dropped, which is the adiabatic approximation.
    """
    if J != 0:
        raise NotImplementedError("only J = 0 is decoupled exactly in W")
    species = normalize_species(species)
    grid = grid or DvrGrid.for_species(species)
    tj = load_constants().atom(species).twice_j
    j = tj / 2
    st = _strengths(species, "two_tensor")
    c = load_constants()
    out = {}
    for t1 in range(tj, -1, -2):
        if t1 == 0 and tj % 2:
            continue
        # gerade combination of |a,-a> and |-a,a>; for a = 0 the state itself
        cent = 0.0
        for j_el in range(0, tj + 1, 2):
            amp = clebsch_gordan(tj, tj, t1, -t1, 2 * j_el, 0)
            if t1:
                eps = -1 if tj % 2 else 1
                amp = (amp + eps * clebsch_gordan(tj, tj, -t1, t1, 2 * j_el, 0)) / math.sqrt(2.0)
            cent += amp**2 * j_el * (j_el + 1)
        d21 = (6.0 * (t1 / 2) ** 2 - 2 * j * (j + 1)) / math.sqrt(6.0)

        def pot(r, d21=d21, cent=cent):
            return st[(0, 1)](r) + d21 * st[(2, 1)](r) + cent * c.hartree_in_cm / (2.0 * grid.mu * r**2)

        out[t1 / 2] = single_channel_levels(pot, grid, e_max)
    return out


# --- spectroscopic constants ------------------------------------------------------


def lowest_adiabat(species: str, model: str = "two_tensor"):
    """Callable R -> lowest adiabatic potential (cm^-1)."""
    species = normalize_species(species)
    if model == "two_tensor":
        return lambda r: _lowest_two_tensor_curve(species, np.asarray(r, dtype=float))
    basis = build_basis(species)
    st = _strengths(species, model)

    def curve(r):
        rs = np.atleast_1d(np.asarray(r, dtype=float))
        e = adiabats(st, rs, basis).energies.min(axis=1)
        return e if np.ndim(r) else float(e[0])

    return curve


@lru_cache(maxsize=8)
def lowest_adiabat_minimum(species: str, model: str = "two_tensor") -> tuple[float, float]:
    return _curves.find_minimum(lowest_adiabat(species, model), (7.0, 12.0), samples=201)


def spectroscopic_constants(species: str, model: str = "two_tensor", grid: DvrGrid | None = None) -> dict:
    """R_e, D_e, B_e and two omega_e estimates from the lowest adiabat.

    ``omega_e_curvature`` is sqrt(k/mu) with k from a five-point second
    derivative at R_e; ``omega_e_dvr`` is E(v=1) - E(v=0) of the J = 0
    single-channel DVR on the same curve.
    """
    species = normalize_species(species)
    c = load_constants()
    mu = c.reduced_mass_au(species)
    curve = lowest_adiabat(species, model)
    r_e, v_e = lowest_adiabat_minimum(species, model)
    h = 1e-2
    pts = np.array([r_e - 2 * h, r_e - h, r_e, r_e + h, r_e + 2 * h])
    f = np.asarray(curve(pts), dtype=float)
    k = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h) / c.hartree_in_cm
    grid = grid or DvrGrid.for_species(species)
    levels = single_channel_levels(curve, grid)
    if len(levels) < 2:
        raise ValueError("fewer than two bound levels on the lowest adiabat")
    return {
        "r_e": r_e,
        "d_e": -v_e,
        "b_e": c.hartree_in_cm / (2.0 * mu * r_e**2),
        "omega_e_curvature": c.hartree_in_cm * math.sqrt(k / mu) if k > 0 else float("nan"),
        "omega_e_dvr": float(levels[1] - levels[0]),
        "zero_point": float(levels[0] - v_e),
    }


def convergence_report(species: str, model: str = "two_tensor", J: int = 0, block=("g", "even"),
                       grid: DvrGrid | None = None, n_levels: int = 20, solver: str = "auto",
                       n_radial: int = 80) -> dict:
    """Change of the lowest ``n_levels`` when N grows by half and R_max by 10 a0."""
    species = normalize_species(species)
    grid = grid or DvrGrid.for_species(species)
    fine = DvrGrid(grid.r_min, grid.r_max + 10.0, int(round(grid.n * 1.5)), grid.mu)
    base = solve_block(J, *block, species, model, grid, solver=solver, n_radial=n_radial).energies[:n_levels]
    ref = solve_block(J, *block, species, model, fine, solver=solver, n_radial=n_radial).energies[:n_levels]
    n = min(len(base), len(ref))
    delta = np.abs(base[:n] - ref[:n])
    return {
        "J": J, "block": list(block), "n_levels": int(n),
        "grid": [grid.r_min, grid.r_max, grid.n], "refined_grid": [fine.r_min, fine.r_max, fine.n],
        "max_abs_delta_cm": float(delta.max()) if n else 0.0,
    }
