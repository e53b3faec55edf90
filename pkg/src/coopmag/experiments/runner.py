"""Scenario dispatch: resolve parameters, run, persist, write the manifest."""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .. import __version__
from ..bath import chi_minus_plus, chi_plus_minus, chi_zz
from ..couplings import (
    build_coupling_matrices,
    coupling_Gamma,
    coupling_GammaTilde,
    coupling_J,
    coupling_Jz,
)
from ..dynamics import (
    DynamicsResult,
    Generator,
    all_excited,
    build_jump_channels,
    default_time_grid,
    evolve_density_matrix,
    run_trajectories,
)
from ..errors import ConfigValidation, SingularPoint
from ..params import (
    BathSpec,
    DerivedScales,
    DimensionlessConfig,
    Environment,
    LongitudinalTransport,
    QubitArraySpec,
    derive_scales,
    dimensionless_config,
    get_preset,
)
from ..spectrum import (
    band_structure_poisson,
    band_structure_sum,
    effective_hamiltonian,
    single_excitation_modes,
    zone_average_poisson,
)
from .config import ScenarioConfig
from .disorder import realization_seed, sample_disordered_positions
from .files import atomic_write_text, csv_text, json_text

DEFAULT_SNAPSHOTS = (0.0, 0.5, 1.0, 2.0, 5.0)


@dataclass
class Resolved:
    bath: BathSpec
    qubits: QubitArraySpec
    env: Environment
    scales: DerivedScales
    dcfg: DimensionlessConfig


@dataclass
class RunManifest:
    directory: Path
    files: dict[str, str]
    manifest_path: Path
    wall_seconds: float
    results: dict = field(default_factory=dict)  # in-memory only


def _replace(obj, overrides: dict, section: str):
    known = {f.name for f in dataclasses.fields(obj)}
    bad = {f"{section}.{k}": "unknown key" for k in overrides if k not in known}
    if bad:
        raise ConfigValidation(bad)
    vals = dict(overrides)
    if "positions" in vals and vals["positions"] is not None:
        vals["positions"] = tuple(vals["positions"])
    return dataclasses.replace(obj, **vals)


def resolve(cfg: ScenarioConfig, temperature: Optional[float] = None) -> Resolved:
    """Physical inputs for a scenario: preset, then file overrides, then geometry."""
    bath, qubits, env = get_preset(cfg.preset)
    if cfg.longitudinal:
        known = {f.name for f in dataclasses.fields(LongitudinalTransport)}
        bad = {f"longitudinal.{k}": "unknown key" for k in cfg.longitudinal if k not in known}
        missing = {f"longitudinal.{k}": "missing" for k in known if k not in cfg.longitudinal}
        if bad or missing:
            raise ConfigValidation({**bad, **missing})
        bath = dataclasses.replace(bath, longitudinal=LongitudinalTransport(**cfg.longitudinal))
    bath = _replace(bath, cfg.bath, "bath")
    qubits = _replace(qubits, cfg.qubits, "qubits")
    g = cfg.geometry
    q_over = {}
    if g.n_qubits is not None:
        q_over["n_qubits"] = g.n_qubits
        if qubits.positions is not None and len(qubits.positions) != g.n_qubits:
            q_over["positions"] = None
    if g.standoff_d is not None:
        q_over["standoff_d"] = g.standoff_d
    if q_over:
        qubits = dataclasses.replace(qubits, **q_over)
    e = cfg.environment
    t_env = e.temperature_T[0] if temperature is None else temperature
    if e.applied_field_B0 is not None:
        env = Environment(applied_field_B0=e.applied_field_B0, temperature_T=t_env)
    elif e.detuning is not None:
        env = Environment(detuning=e.detuning, temperature_T=t_env)
    else:
        env = dataclasses.replace(env, temperature_T=t_env)
    scales = derive_scales(bath, qubits, env)
    return Resolved(bath, qubits, env, scales, dimensionless_config(scales, qubits))


def _a_values(cfg: ScenarioConfig, res: Resolved) -> list[float]:
    return list(cfg.geometry.a_over_lambda) or [res.dcfg.a_over_lambda]


def _tag(**kw) -> str:
    return "_".join(f"{k}{v:g}" for k, v in kw.items())


def _norm_lines(res: Resolved) -> list[str]:
    s = res.scales
    return [
        f"nu = {s.nu!r} (CGS, see manifest); Gamma0 = {s.gamma0!r} nu",
        f"lambda = {s.lambda_!r} cm; d/lambda = {s.d_over_lambda!r}; T = {s.temperature_T!r} K",
    ]


class _Writer:
    def __init__(self, directory: Path):
        self.dir = Path(directory)
        self.files: dict[str, str] = {}

    def csv(self, name: str, comments, columns, rows) -> None:
        self.files[name] = atomic_write_text(self.dir / name, csv_text(comments, columns, rows))

    def json(self, name: str, obj) -> None:
        self.files[name] = atomic_write_text(self.dir / name, json_text(obj))


# -- scenario kinds ---------------------------------------------------------------


def _run_couplings(cfg, w: _Writer, out: dict) -> None:
    for T in cfg.environment.temperature_T:
        res = resolve(cfg, T)
        c = res.dcfg
        sc = cfg.couplings
        rhos = np.linspace(sc.rho_min, sc.rho_max, sc.n_rho)
        rows = []
        for r in rhos:
            j_full = coupling_J(r, c, "full") if sc.full else math.nan
            jz = coupling_Jz(r, c) if sc.include_jz else math.nan
            rows.append((r, j_full, coupling_J(r, c, "asymptotic"), jz,
                         float(coupling_Gamma(r, c)), float(coupling_GammaTilde(r, c))))
        name = f"couplings_{_tag(T=T)}.csv"
        w.csv(name, ["units: rho in lambda, couplings in nu"] + _norm_lines(res),
              ["rho_over_lambda", "J_full", "J_asymptotic", "Jz", "Gamma", "GammaTilde"], rows)
        out[name] = np.array(rows)
        for a in _a_values(cfg, res):
            cc = c.with_lattice(a)
            C = build_coupling_matrices(cc.positions(), cc, cfg.solver.j_mode, include_jz=sc.include_jz)
            w.json(f"matrices_{_tag(a=a, T=T)}.json", {
                "unit": "nu", "gamma0": C.gamma0, "positions_over_lambda": cc.positions(),
                "J": C.J, "Jz": C.Jz, "Gamma": C.Gamma, "GammaTilde": C.GammaTilde,
                "psd_clip_applied": C.psd_clip_applied, "j_mode": C.j_mode,
            })


def _k_grid(n_k: int) -> np.ndarray:
    # n_k points in (-pi, pi]
    return -math.pi + 2.0 * math.pi * np.arange(1, n_k + 1) / n_k


def _run_bands(cfg, w: _Writer, out: dict) -> None:
    res = resolve(cfg)
    c = res.dcfg
    summary = {}
    for a in _a_values(cfg, res):
        ka = _k_grid(cfg.bands.n_k)
        s = band_structure_sum(ka, a, c, n_max=cfg.bands.n_max)
        poisson = []
        for q in ka:
            try:
                poisson.append(float(band_structure_poisson(q, a).Gamma_k[0]))
            except SingularPoint:
                poisson.append(math.nan)
        rows = [(q / math.pi, jk, gk, "truncated-sum") for q, jk, gk in zip(ka, s.J_k, s.Gamma_k)]
        rows += [(q / math.pi, math.nan, gk, "poisson") for q, gk in zip(ka, poisson)]
        name = f"bands_{_tag(a=a)}.csv"
        w.csv(name, [f"units: k a / pi, rates in Gamma0; n_max = {s.n_max}; Hann-tapered sums"]
              + _norm_lines(res), ["k_a_over_pi", "J_k_over_gamma0", "Gamma_k_over_gamma0", "method"], rows)
        out[name] = {"ka": ka, "J_k": s.J_k, "Gamma_k": s.Gamma_k, "poisson": np.array(poisson)}
        summary[f"{a:g}"] = {"zone_average_poisson": zone_average_poisson(a),
                             "last_term": s.last_term}
    w.json("bands_summary.json", summary)


def _run_spectrum(cfg, w: _Writer, out: dict) -> None:
    res = resolve(cfg)
    c = res.dcfg
    n = res.qubits.n_qubits
    sweep = []
    for a in _a_values(cfg, res):
        cc = c.with_lattice(a, n)
        C = build_coupling_matrices(cc.positions(), cc, cfg.solver.j_mode).in_units_of_gamma0()
        modes = single_excitation_modes(effective_hamiltonian(C))
        g = modes.decay_rates
        rows = [(m + 1, e.real, gm) for m, (e, gm) in enumerate(zip(modes.eigenvalues, g))]
        name = f"spectrum_{_tag(N=n, a=a)}.csv"
        w.csv(name, ["units: Gamma0; rotating frame at omega_qi; ascending decay rate"] + _norm_lines(res),
              ["mode", "re_E_over_gamma0", "gamma_m_over_gamma0"], rows)
        out[name] = modes
        sweep.append((a, g[0], g[-1], math.fsum(g) / n, modes.residual))
    w.csv(f"spectrum_sweep_{_tag(N=n)}.csv", ["units: Gamma0"] + _norm_lines(res),
          ["a_over_lambda", "min_gamma_m", "max_gamma_m", "mean_gamma_m", "residual"], sweep)
    out["sweep"] = np.array(sweep)


def _independent_rate(t: np.ndarray, n: int, boltzmann: float) -> np.ndarray:
    """Emission rate of N uncorrelated qubits started excited (units Gamma0(T))."""
    p_ss = boltzmann / (1.0 + boltzmann)
    p = p_ss + (1.0 - p_ss) * np.exp(-2.0 * (1.0 + boltzmann) * t)
    return 2.0 * n * (p - boltzmann * (1.0 - p))


def _evolve(cfg: ScenarioConfig, positions, c: DimensionlessConfig, t_grid, snapshots=(),
            seed_index: int = 0) -> DynamicsResult:
    C = build_coupling_matrices(positions, c, cfg.solver.j_mode).in_units_of_gamma0()
    gen = Generator.from_couplings(C)
    n = len(positions)
    if cfg.solver.method == "dense":
        return evolve_density_matrix(all_excited(n), gen, t_grid, rtol=cfg.solver.rtol,
                                     atol=cfg.solver.atol, snapshot_times=snapshots)
    seed = int(np.random.SeedSequence([cfg.seed, seed_index]).generate_state(1, np.uint64)[0])
    return run_trajectories(all_excited(n), gen, build_jump_channels(C), t_grid,
                            cfg.solver.n_traj, seed, snapshot_times=snapshots)


@dataclass
class EnsembleResult:
    mean: DynamicsResult
    realizations: list[DynamicsResult]
    positions: list[np.ndarray]


def run_disorder_ensemble(cfg: ScenarioConfig, a_over_lambda: Optional[float] = None,
                          temperature: Optional[float] = None, snapshots=()) -> EnsembleResult:
    """Average the dynamics over ``disorder.n_realizations`` displaced chains."""
    res = resolve(cfg, temperature)
    n = res.qubits.n_qubits
    a = a_over_lambda if a_over_lambda is not None else _a_values(cfg, res)[0]
    c = res.dcfg.with_lattice(a, n)
    base = c.positions()
    t_grid = default_time_grid(cfg.solver.t_max, cfg.solver.n_points)
    d = cfg.disorder
    runs, positions = [], []
    for r in range(d.n_realizations):
        pos = sample_disordered_positions(base, a, d.xi, realization_seed(d.master_seed, r))
        positions.append(pos)
        runs.append(_evolve(cfg, pos, c.with_positions(pos), t_grid, snapshots, seed_index=r))
    def pooled_se(name):
        # independent runs: the variance of the mean adds in quadrature
        se = [getattr(x, name) for x in runs]
        if any(v is None for v in se):
            return None
        return np.sqrt(np.sum(np.square(se), axis=0)) / len(runs)

    single = d.n_realizations == 1 and d.xi == 0
    mean = DynamicsResult(
        t_grid=t_grid,
        sigma_z_per_qubit=np.mean([x.sigma_z_per_qubit for x in runs], axis=0),
        emission_rate=np.mean([x.emission_rate for x in runs], axis=0),
        correlation_snapshots=[
            (t, np.mean([x.correlation_snapshots[i][1] for x in runs], axis=0))
            for i, (t, _) in enumerate(runs[0].correlation_snapshots)
        ],
        method=runs[0].method if single else f"{runs[0].method}-ensemble",
        trajectory_count=runs[0].trajectory_count,
        sigma_z_se=pooled_se("sigma_z_se"),
        total_sigma_z_se=pooled_se("total_sigma_z_se"),
        emission_rate_se=pooled_se("emission_rate_se"),
        diagnostics={"n_realizations": d.n_realizations, "xi": d.xi},
    )
    return EnsembleResult(mean, runs, positions)


def _dyn_rows(r: DynamicsResult, indep: np.ndarray):
    n = r.n_qubits
    tot = r.total_sigma_z
    for k, t in enumerate(r.t_grid):
        row = [t, r.emission_rate[k],
               r.emission_rate_se[k] if r.emission_rate_se is not None else math.nan,
               indep[k], tot[k],
               r.total_sigma_z_se[k] if r.total_sigma_z_se is not None else math.nan]
        row += list(r.sigma_z_per_qubit[:, k])
        yield row


def _dyn_columns(n: int) -> list[str]:
    return (["t", "R", "R_se", "R_independent", "sum_sigma_z", "sum_sigma_z_se"]
            + [f"sigma_z_{i}" for i in range(n)])


def _run_dynamics(cfg, w: _Writer, out: dict, correlations: bool = False) -> None:
    snapshots = ()
    if correlations:
        snapshots = tuple(cfg.solver.snapshot_times) or tuple(
            t for t in DEFAULT_SNAPSHOTS + (cfg.solver.t_max,) if t <= cfg.solver.t_max)
    for T in cfg.environment.temperature_T:
        res = resolve(cfg, T)
        n = res.qubits.n_qubits
        for a in _a_values(cfg, res):
            ens = run_disorder_ensemble(cfg, a, T, snapshots)
            tag = _tag(N=n, a=a, T=T)
            indep = _independent_rate(ens.mean.t_grid, n, res.dcfg.boltzmann_factor)
            comments = ["units: t in 1/Gamma0(T), R in Gamma0(T); R = -(1/2) d/dt sum <sigma_z>",
                        f"method = {ens.mean.method}; xi = {cfg.disorder.xi:g}; "
                        f"realizations = {cfg.disorder.n_realizations}"] + _norm_lines(res)
            multi = cfg.disorder.n_realizations > 1 or cfg.disorder.xi > 0
            if multi:
                for i, (run, pos) in enumerate(zip(ens.realizations, ens.positions)):
                    w.csv(f"dynamics_{tag}_r{i:03d}.csv",
                          comments + [f"positions/lambda = {list(map(float, pos))}"],
                          _dyn_columns(n), _dyn_rows(run, indep))
            main = ens.mean if multi else ens.realizations[0]
            w.csv(f"dynamics_{tag}.csv", comments, _dyn_columns(n), _dyn_rows(main, indep))
            out[tag] = ens
            if correlations:
                rows = [(t, i, j, cm[i, j]) for t, cm in main.correlation_snapshots
                        for i in range(n) for j in range(n)]
                w.csv(f"correlations_{tag}.csv", ["c_ab = <s_a^+ s_b^+ s_b^- s_a^->"] + comments,
                      ["t", "alpha", "beta", "c"], rows)


def _run_bath_probe(cfg, w: _Writer, out: dict) -> None:
    res = resolve(cfg)
    p = cfg.probe
    omegas = res.scales.omega_qi * np.linspace(p.omega_min, p.omega_max, p.n_omega)
    ks = np.linspace(0.0, p.k_max, p.n_k) / res.scales.lambda_
    rows = []
    for om in omegas:
        if p.susceptibility == "minus_plus":
            vals = chi_minus_plus(om, ks, res.bath, res.env, res.qubits)
        elif p.susceptibility == "plus_minus":
            vals = chi_plus_minus(om, ks, res.bath, res.env, res.qubits)
        else:
            vals = chi_zz(om, ks, res.bath)
        rows += [(om, k, v.real, v.imag) for k, v in zip(ks, np.atleast_1d(vals))]
    name = f"bath_probe_{p.susceptibility}.csv"
    w.csv(name, ["units: omega rad/s, k 1/cm, susceptibility in CGS",
                 f"omega_qi = {res.scales.omega_qi!r}; Delta_F = {res.scales.gap_DeltaF!r}"],
          ["omega", "k", "re", "im"], rows)
    out[name] = np.array(rows)


_DISPATCH = {
    "couplings": _run_couplings,
    "bands": _run_bands,
    "spectrum": _run_spectrum,
    "dynamics": _run_dynamics,
    "correlations": lambda cfg, w, out: _run_dynamics(cfg, w, out, correlations=True),
    "bath-probe": _run_bath_probe,
}


def run_scenario(cfg: ScenarioConfig, out_dir: Optional[str] = None) -> RunManifest:
    """Run one scenario and persist its outputs; the manifest is written last."""
    start = time.perf_counter()
    directory = Path(out_dir or cfg.output.directory)
    if out_dir is not None:
        cfg = dataclasses.replace(cfg, output=dataclasses.replace(cfg.output, directory=str(out_dir)))
    w = _Writer(directory)
    results: dict = {}
    res0 = resolve(cfg)
    _DISPATCH[cfg.kind](cfg, w, results)
    wall = time.perf_counter() - start
    atomic_write_text(directory / "resolved_config.toml", cfg.dumps())
    manifest = {
        "tool": "coopmag",
        "version": __version__,
        "kind": cfg.kind,
        "config": cfg.to_dict(),
        "derived_scales": res0.scales.as_dict(),
        "dimensionless": {k: v for k, v in dataclasses.asdict(res0.dcfg).items()
                          if k != "positions_over_lambda"},
        "seeds": {"seed": cfg.seed, "disorder_master_seed": cfg.disorder.master_seed},
        "wall_seconds": wall,
        "files": dict(sorted(w.files.items())),
    }
    path = directory / "manifest.json"
    atomic_write_text(path, json_text(manifest))
    return RunManifest(directory=directory, files=dict(w.files), manifest_path=path,
                       wall_seconds=wall, results=results)
