"""Acceptance criteria 1-10.

Each test records one PASS/FAIL line (printed with ``-s`` and in the terminal
summary).  Tolerances are the pinned ones; criteria known to be unattainable
with the prescribed construction are left to fail.

Run standalone with ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest
import scipy.linalg

from oracles import brute_force_coupling
from reference import CORR_ER, CORR_TM, TABLE_ER, TABLE_TM, V0_NODES, V2_NODES, VSS_NODES
from lndimer.constants import load_constants
from lndimer.curves import (
    assemble_spin_stretched,
    assemble_v2,
    find_minimum,
    load_table,
    strength_set,
    strength_v0,
)
from lndimer.dispersion import exact_ratios, vdw_coefficients
from lndimer.lines import bundled_linelist
from lndimer.rovib import (
    DvrGrid,
    allowed_blocks,
    bound_levels,
    build_channels,
    coupling_matrix,
    decoupled_levels,
    dvr_kinetic,
    solve_block,
    spectroscopic_constants,
)
from lndimer.spintensor import OPERATOR_KEYS, adiabats, build_basis, fit_strengths

TABLES = {"Er": TABLE_ER, "Tm": TABLE_TM}
CORRS = {"Er": CORR_ER, "Tm": CORR_TM}


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_c01_dispersion_reproduction(verdict):
    v = verdict(1, "dispersion coefficients reproduce the published table")
    lines = {sp: bundled_linelist(sp) for sp in TABLES}
    t0 = time.perf_counter()
    sets = {sp: vdw_coefficients(ll) for sp, ll in lines.items()}
    elapsed = time.perf_counter() - t0
    for sp, table in TABLES.items():
        ds = sets[sp]
        dv = max(_rel(ds[k], val) for k, (val, _) in table.items())
        du = max(_rel(ds.u[k], u) for k, (_, u) in table.items())
        v.check(f"{sp} central values max rel dev {dv:.2e} <= 2e-3", dv <= 2e-3)
        v.check(f"{sp} uncertainties max rel dev {du:.3f} <= 0.10", du <= 0.10)
    v.check(f"runtime {elapsed:.3f} s < 1 s", elapsed < 1.0)
    v.finish()


def test_c02_exact_relations(verdict):
    v = verdict(2, "exact ratios between dependent coefficients")
    for sp in TABLES:
        ds = vdw_coefficients(bundled_linelist(sp))
        for dep, (ind, ratio) in exact_ratios().items():
            dev = abs(ds[dep] / ds[ind] - ratio) / ratio
            v.check(f"{sp} C{dep} / C{ind} rel dev {dev:.1e} <= 1e-12", dev <= 1e-12)
    v.check("ratios are sqrt2, sqrt(10/7), 6 sqrt(18/7)",
            [r for _, r in exact_ratios().values()] == [math.sqrt(2.0), math.sqrt(10 / 7), 6 * math.sqrt(18 / 7)])
    v.finish()


def test_c03_correlation_matrix(verdict):
    v = verdict(3, "correlation matrix of the independent coefficients")
    for sp, ref in CORRS.items():
        corr = vdw_coefficients(bundled_linelist(sp)).corr
        dev = float(np.max(np.abs(corr - np.array(ref))))
        v.check(f"{sp} max |r - r_pub| = {dev:.3f} <= 0.03", dev <= 0.03)
        v.check(f"{sp} r(C2^(1), C0^(3)) = {corr[1, 3]:.4f} rounds to -1.00", round(corr[1, 3], 2) == -1.0)
    v.finish()


def test_c04_basis_census(verdict):
    v = verdict(4, "symmetrized basis census and lowest adiabats")
    for sp, (tot, g, u) in {"Er": (91, 49, 42), "Tm": (36, 16, 20)}.items():
        b = build_basis(sp)
        got = (len(b.states), b.count("g"), b.count("u"))
        v.check(f"{sp} states total/g/u = {got}", got == (tot, g, u))
    er = adiabats(strength_set("Er", "full"), np.arange(7.0, 12.01, 0.5), "Er")
    lows = {str(er.lowest(ir)) for ir in range(len(er.r))}
    v.check(f"Er lowest full-model adiabat on 7..12 a0 is {lows}", lows == {"1:0g+"})
    tm = adiabats(strength_set("Tm", "two_tensor"), 8.5, "Tm")
    order = np.argsort(tm.energies[0], kind="stable")
    low = tm.energies[0][order[:4]]
    labels = {str(tm.labels[n]) for n in order[:3]}
    v.check(f"Tm two-tensor lowest manifold {sorted(labels)} three-fold degenerate",
            labels == {"1:0g+", "1:0u-", "1:1u"} and np.ptp(low[:3]) < 1e-9 and low[3] - low[0] > 1e-3)
    v.finish()


def _noise_trials(species: str, r: float, n_trials: int, seed: int):
    st = {k: float(f(r)) for k, f in strength_set(species, "full").items()}
    aset = adiabats(st, r, species)
    exact = fit_strengths(aset, active=OPERATOR_KEYS)
    err = max(abs(exact.values[k][0] - st[k]) for k in st)
    back = adiabats(exact.strength_set(0).at(r), r, species)
    resid = float(np.max(np.abs(back.energies - aset.energies)))
    data = aset.to_data()[float(r)]
    ss = aset.labels[int(np.argmax([lab.n == 1 and lab.omega == aset.basis.twice_j for lab in aset.labels]))]
    rng = np.random.default_rng(seed)
    chi2 = []
    for _ in range(n_trials):
        noisy = {lab: e if lab == ss else e + rng.normal(0.0, 10.0) for lab, e in data.items()}
        chi2.append(fit_strengths({r: noisy}, species, active=OPERATOR_KEYS, u=10.0).chi2_nu[0])
    return err, resid, np.array(chi2)


@pytest.mark.slow
def test_c05_strength_fit_round_trip(verdict):
    v = verdict(5, "strength fit round trip and chi2 under injected noise")
    for sp in ("Er", "Tm"):
        err, resid, chi2 = _noise_trials(sp, 8.7, 100, seed=2024)
        v.check(f"{sp} exact refit: max strength error {err:.1e}, adiabat residual {resid:.1e} < 1e-9 cm^-1",
                resid < 1e-9)
        v.check(f"{sp} mean chi2_nu over 100 trials = {chi2.mean():.3f} in [0.5, 1.5]", 0.5 <= chi2.mean() <= 1.5)
    v.finish()


def test_c06_curve_assembly(verdict):
    v = verdict(6, "curve assembly: nodes, continuity, R_e, C6 limit")
    for sp in ("Er", "Tm"):
        vss, v2 = assemble_spin_stretched(sp), assemble_v2(sp)
        v0 = strength_v0(sp, vss, v2)
        ok = all(vss(r) == e for r, e in VSS_NODES[sp].items()) and all(v2(r) == e for r, e in V2_NODES[sp].items())
        tss, t2 = load_table(sp, "ss"), load_table(sp, "v2")
        ok = ok and np.array_equal(vss(tss.r), tss.v) and np.array_equal(v2(t2.r), t2.v)
        v.check(f"{sp} V_ss and V2 reproduce every table node exactly", ok)
        dv0 = max(abs(v0(r) - e) for r, e in V0_NODES[sp].items())
        v.check(f"{sp} V0 column max dev {dv0:.1e} <= 1e-6", dv0 <= 1e-6)
        jump = max(abs(d) for c in strength_set(sp, "full").values() for d in c.join_mismatch().values())
        v.check(f"{sp} max jump at joins {jump:.1e} < 1e-6 cm^-1", jump < 1e-6)
        dev = abs(100.0**6 * vss(100.0) / vss.meta["c6_cm"] - 1.0)
        v.check(f"{sp} R^6 V_ss / C6,ss - 1 at 100 a0 = {dev:.2%} <= 0.1%", dev <= 1e-3)
    r_e = find_minimum(assemble_spin_stretched("Er"))[0]
    v.check(f"Er R_e = {r_e:.3f} a0 within 8.70 +- 0.05", abs(r_e - 8.70) <= 0.05)
    v.finish()


def test_c07_recoupling_oracle(verdict):
    v = verdict(7, "coupled-basis operators equal uncoupled brute force")
    cases = [("Tm", J) for J in (0, 1, 2)] + [("Er", 0)]
    spent = 0.0
    for sp, J in cases:
        tj = load_constants().atom(sp).twice_j
        chans = [c for blk in allowed_blocks(sp) for c in build_channels(J, *blk, sp)]
        dev = 0.0
        for key in OPERATOR_KEYS:
            t0 = time.perf_counter()
            g = coupling_matrix(*key, chans, sp)
            spent += time.perf_counter() - t0
            dev = max(dev, float(np.max(np.abs(g - brute_force_coupling(key, chans, tj)))))
        v.check(f"{sp} J={J} ({len(chans)} channels) max |G - G_brute| = {dev:.1e} <= 1e-10", dev <= 1e-10)
    v.check(f"coupling_matrix runtime {spent:.1f} s < 60 s", spent < 60.0)
    v.finish()


def test_c08_dvr_oracle(verdict):
    v = verdict(8, "DVR harmonic oracle and decoupled two-tensor comparison")
    mu = load_constants().reduced_mass_au("Er")
    omega = 1.0e-5
    g = DvrGrid(2.0, 30.0, 300, mu)
    w0 = scipy.linalg.eigvalsh(dvr_kinetic(g) + np.diag(0.5 * mu * omega**2 * (g.points - 16.0) ** 2),
                               subset_by_index=(0, 0))[0]
    dev = abs(w0 / (omega / 2) - 1.0)
    v.check(f"harmonic ground / (hbar omega / 2) - 1 = {dev:.1e} <= 1e-6", dev <= 1e-6)
    grid = DvrGrid.for_species("Er")
    coupled = solve_block(0, "g", "even", "Er", grid=grid).energies[:20]
    dec = np.sort(np.concatenate(list(decoupled_levels("Er", grid=grid).values())))[:20]
    diff = float(np.max(np.abs(coupled - dec)))
    v.check(f"Er J=0 coupled vs decoupled, lowest 20 levels: max |dE| = {diff:.3f} cm^-1 <= 1e-6", diff <= 1e-6)
    v.finish()


def test_c09_spectroscopic_constants(verdict):
    v = verdict(9, "rotational constant, vibrational spacing, fine-structure ladder")
    for sp, b_ref, w_ref in (("Er", 0.0095, 27.0), ("Tm", 0.0096, 27.2)):
        sc = spectroscopic_constants(sp)
        v.check(f"{sp} B_e = {sc['b_e']:.5f} within 3% of {b_ref}", _rel(sc["b_e"], b_ref) <= 0.03)
        v.check(f"{sp} DVR spacing {sc['omega_e_dvr']:.2f} within 15% of {w_ref} "
                f"(curvature {sc['omega_e_curvature']:.2f})", _rel(sc["omega_e_dvr"], w_ref) <= 0.15)
    dec = decoupled_levels("Er")
    a = np.array(sorted(dec))
    slope = np.polyfit(a**2, [dec[x][0] for x in a], 1)[0]
    r_e = find_minimum(assemble_spin_stretched("Er"))[0]
    pred = math.sqrt(6.0) * float(assemble_v2("Er")(r_e))
    v.check(f"sqrt6 V2(R_e) = {pred:.3f} cm^-1 in 2.3 +- 0.2", abs(pred - 2.3) <= 0.2)
    v.check(f"Er ladder slope {slope:.3f} cm^-1 in 2.3 +- 0.2", abs(slope - 2.3) <= 0.2)
    v.finish()


@pytest.mark.slow
def test_c10_level_structure(verdict):
    v = verdict(10, "qualitative level structure")
    t0 = time.perf_counter()
    tm = bound_levels(range(0, 7), None, "full", "Tm", e_max=-835.0)
    ground = tm[0]
    v.check(f"Tm ground J={ground.J} {ground.block} {ground.omega_label} v={ground.v}",
            (ground.J, ground.block, ground.omega_label, ground.v) == (0, "g/even", "1:0g+", 0))
    b_e = spectroscopic_constants("Tm")["b_e"]
    # parity of a 0+ level is (-1)^J, so the ladder alternates between the even- and odd-l gerade blocks
    prog = {}
    for lv in tm:
        if lv.inversion == "g" and lv.omega_label == "1:0g+" and lv.v == 0 and lv.J not in prog:
            prog[lv.J] = lv.energy
    ratios = [(prog[J] - prog[0]) / (J * (J + 1)) / b_e for J in range(1, 7) if J in prog]
    v.check(f"Tm v=0 0g+ rotational progression (E_J - E_0) / B_e J(J+1) = {np.round(ratios, 3).tolist()} "
            "within 15% of 1", len(ratios) == 6 and all(abs(x - 1) <= 0.15 for x in ratios))
    u_low = min((lv for lv in tm if lv.inversion == "u"), key=lambda lv: lv.energy)
    v.check(f"Tm lowest ungerade level at J={u_low.J}", u_low.J == 3)
    scan = {}
    for J in range(0, 16):
        lv = bound_levels([J], [("g", "even")], "full", "Er", e_max=-830.0, solver="contracted")
        z = [b.energy for b in lv if b.omega_label == "1:0g+" and b.v == 0]
        if z:
            scan[J] = z[0]
    j_min = min(scan, key=scan.get)
    v.check(f"Er full-model v=0 0g+ J-scan minimum at J={j_min}", j_min == 10)
    full = solve_block(0, "g", "even", "Er", "full").energies[:10]
    two = solve_block(0, "g", "even", "Er", "two_tensor").energies[:10]
    mean = float(np.mean(np.abs(full - two)))
    v.check(f"Er two-tensor vs full, lowest 10 J=0 levels: mean |dE| = {mean:.2f} cm^-1, of order 1 (1/3..3)",
            1 / 3 <= mean <= 3)
    elapsed = time.perf_counter() - t0
    v.check(f"runtime {elapsed:.0f} s < 1800 s", elapsed < 1800)
    v.finish()


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-s", "-q", "-p", "no:cacheprovider"]))
