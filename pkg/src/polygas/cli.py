"""Command-line front end: sample | gibbs | rate | equilibrium | validate.

Configuration is a flat key=value text file; command-line flags override
file values.  Every run appends a record (config hash, version, outputs,
timings) to runs.jsonl in the output directory; data files are never
overwritten by re-runs, records only accumulate.  Exit codes: 0 success,
1 validation failure, 2 usage error, 3 IO error.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import acceptance
from . import ensembles as en
from . import equilibrium as eq
from . import functionals as fn
from . import gibbs as gb
from .measures import GridMeasure, bl_distance, read_measure_csv, write_measure_csv

OUTPUT_ROOT_ENV = "POLYGAS_OUTPUT_ROOT"


def _fmt(x):
    return f"{float(x):.17g}"


class UsageError(Exception):
    pass


def read_config(path):
    """Flat key = value lines; '#' starts a comment."""
    values = {}
    try:
        with open(path) as fh:
            for line_no, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{line_no}: expected key = value")
                key, value = line.split("=", 1)
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    return values


def _canonical_config(values):
    return "".join(f"{k}={values[k]}\n" for k in sorted(values))


def _config_hash(values):
    return hashlib.sha256(_canonical_config(values).encode()).hexdigest()[:16]


def _merge_config(args, keys):
    """Effective settings: config-file values overridden by flags actually
    given on the command line."""
    effective = {}
    file_values = read_config(args.config) if args.config else {}
    for key, cast in keys.items():
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            effective[key] = flag_val
        elif key in file_values:
            effective[key] = cast(file_values[key])
    return effective


def _out_dir(settings, command):
    """Data directory for this run: <root>/<command>-<config hash>.

    Identical configs map to the same directory and reproduce byte-identical
    data files; different configs never touch each other's data.  The run
    record file runs.jsonl inside the directory only ever grows.
    """
    root = settings.get("out") or os.environ.get(OUTPUT_ROOT_ENV) or "."
    run_dir = os.path.join(root, f"{command}-{_config_hash({k: str(v) for k, v in settings.items()})}")
    os.makedirs(run_dir, exist_ok=True)
    if not os.access(run_dir, os.W_OK):
        raise OSError(f"output directory {run_dir} is not writable")
    return run_dir

def _append_record(out_dir, command, settings, outputs, timings):
    record = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "command": command,
        "version": __version__,
        "config_hash": _config_hash({k: str(v) for k, v in settings.items()}),
        "settings": {k: str(v) for k, v in settings.items()},
        "outputs": outputs,
        "timings": {k: round(v, 3) for k, v in timings.items()},
    }
    with open(os.path.join(out_dir, "runs.jsonl"), "a") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def _parse_int_list(text):
    return [int(v) for v in str(text).split(",") if v != ""]


def _model_spec(settings, n):
    basis = settings.get("model", "kac")
    field = settings.get("field", "complex")
    if basis == "orthogonal":
        table = settings.get("orthogonal_table")
        if not table:
            raise UsageError("orthogonal model needs orthogonal_table=FILE")
        support, nu_w, phi = en.read_orthogonal_table(table)
        return en.ModelSpec(basis, field, n, support=support, nu_weights=nu_w, phi=phi)
    return en.ModelSpec(basis, field, n)


def _reference_measure(settings, spec):
    if spec.basis == "kac":
        m = int(settings.get("grid_size", 1024))
        return GridMeasure("plane", fn.circle_grid(m), np.full(m, 1.0 / m))
    if spec.basis == "elliptic":
        pts, w = fn.fubini_study_grid(32, 32)
        return GridMeasure("plane", pts, w)
    return GridMeasure("plane", spec.support, spec.nu_weights / spec.nu_weights.sum())


def cmd_sample(settings):
    out = _out_dir(settings, "sample")
    ns = _parse_int_list(settings.get("n", "16,64,256"))
    if not ns:
        raise UsageError("n list must be nonempty")
    seeds = int(settings.get("seeds", 20))
    t0 = time.time()
    outputs = []
    distance_rows = []
    for n in ns:
        spec = _model_spec(settings, n)
        reference = _reference_measure(settings, spec)
        for seed in range(seeds):
            poly = en.sample_coefficients(spec, seed)
            mu = en.find_roots(poly)
            tag = f"{spec.basis}_n{n}_seed{seed}"
            coeff_path = os.path.join(out, f"coefficients_{tag}.csv")
            with open(coeff_path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["k", "re", "im"])
                coeffs = poly.coefficients() * np.exp(poly.log_scale)
                for k, c in enumerate(coeffs):
                    writer.writerow([k, _fmt(c.real), _fmt(c.imag)])
            roots_path = os.path.join(out, f"roots_{tag}.csv")
            write_measure_csv(roots_path, mu)
            outputs += [coeff_path, roots_path]
            d = bl_distance(mu, reference, mode="surrogate")
            distance_rows.append((spec.basis, n, seed, d.value, d.mode))
    dist_path = os.path.join(out, "distances.csv")
    with open(dist_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "n", "seed", "bl_distance", "mode"])
        for row in distance_rows:
            writer.writerow([row[0], row[1], row[2], _fmt(row[3]), row[4]])
    med_path = os.path.join(out, "distance_medians.csv")
    with open(med_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "n", "median_bl_distance"])
        for n in ns:
            ds = [r[3] for r in distance_rows if r[1] == n]
            writer.writerow([settings.get("model", "kac"), n, _fmt(np.median(ds))])
    outputs += [dist_path, med_path]
    _append_record(out, "sample", settings, outputs, {"total": time.time() - t0})
    return 0


def cmd_gibbs(settings):
    out = _out_dir(settings, "gibbs")
    n = int(settings.get("n", 2))
    steps = int(settings.get("steps", 100_000))
    seed = int(settings.get("seed", 0))
    record_every = int(settings.get("record_every", 10))
    t0 = time.time()
    spec = _model_spec(settings, n)
    if spec.field == "real":
        run = gb.mcmc_real_mixture(spec, steps, seed, record_every=record_every)
    else:
        run = gb.mcmc_complex(spec, steps, seed, record_every=record_every)
    tag = f"{spec.basis}_{spec.field}_n{n}_seed{seed}"
    chain_path = os.path.join(out, f"chain_{tag}.csv")
    with open(chain_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["step", "H", "k"]
        for i in range(n):
            header += [f"z{i}_re", f"z{i}_im"]
        writer.writerow(header)
        for idx, state in enumerate(run.states):
            row = [idx * record_every, _fmt(state.energy), state.k if state.k is not None else ""]
            for z in state.particles:
                row += [_fmt(z.real), _fmt(z.imag)]
            writer.writerow(row)
    diag = run.diagnostics
    diag_path = os.path.join(out, f"diagnostics_{tag}.json")
    with open(diag_path, "w") as fh:
        json.dump(
            {
                "acceptance_rates": diag.acceptance_rates,
                "autocorrelation_time": diag.autocorr_time,
                "k_histogram": None if diag.k_histogram is None else diag.k_histogram.tolist(),
                "max_cache_drift": diag.max_cache_drift,
                "burn_in": diag.burn_in,
                "effective_samples": len(run.effective_states()),
            },
            fh,
            indent=2,
        )
    outputs = [chain_path, diag_path]
    if settings.get("validate_against_direct"):
        draws = min(len(run.effective_states()), 10_000)
        prod_d, tot_d = acceptance.direct_root_stats(spec.basis, n, draws, 10_000_000)
        states = run.effective_states()[:draws]
        prod_c = np.array([abs(np.prod(s.particles)) for s in states])
        tot_c = np.array([np.abs(s.particles).sum() for s in states])
        from scipy import stats as sstats

        ks_path = os.path.join(out, f"ks_{tag}.json")
        with open(ks_path, "w") as fh:
            json.dump(
                {
                    "prod_p": float(sstats.ks_2samp(prod_d, prod_c).pvalue),
                    "sum_p": float(sstats.ks_2samp(tot_d, tot_c).pvalue),
                    "draws": draws,
                },
                fh,
                indent=2,
            )
        outputs.append(ks_path)
    _append_record(out, "gibbs", settings, outputs, {"total": time.time() - t0})
    return 0


def cmd_rate(settings):
    out = _out_dir(settings, "rate")
    variant = settings.get("variant", "kac")
    m_trunc = float(settings.get("truncation", 30.0))
    center = float(settings.get("center", 0.0))
    t0 = time.time()
    if settings.get("measure"):
        mu = read_measure_csv(settings["measure"])
    else:
        m = int(settings.get("grid_size", 4096))
        mu = GridMeasure("plane", fn.circle_grid(m), np.full(m, 1.0 / m))
    if variant == "kac":
        spec = fn.kac_plane_spec(m=int(settings.get("sup_size", 4096)), offset=0.5)
    elif variant == "elliptic":
        spec = fn.elliptic_plane_spec()
    else:
        raise UsageError(f"unsupported rate variant {variant!r}")
    if settings.get("symmetrized"):
        value = fn.tilde_rate_function(mu, spec, M=m_trunc, center=center)
    else:
        value = fn.rate_function(mu, spec, M=m_trunc, center=center)
    path = os.path.join(out, f"rate_{variant}.json")
    with open(path, "w") as fh:
        json.dump({"variant": variant, "truncation": m_trunc, "value": value}, fh, indent=2)
    print(f"rate[{variant}] = {value:.9g}")
    _append_record(out, "rate", settings, [path], {"total": time.time() - t0})
    return 0


def cmd_equilibrium(settings):
    out = _out_dir(settings, "equilibrium")
    variant = settings.get("variant", "elliptic")
    n_theta = int(settings.get("grid_theta", 40))
    n_phi = int(settings.get("grid_phi", 50))
    iterations = int(settings.get("iterations", 3000))
    tolerance = float(settings.get("tolerance", 2e-2))
    t0 = time.time()
    pts, _ = fn.sphere_grid(n_theta, n_phi)
    if variant == "kac":
        spec = fn.kac_sphere_spec(m=512, offset=0.5)
    elif variant == "elliptic":
        spec = fn.elliptic_sphere_spec(n_theta + 1, n_phi - 1)
    else:
        raise UsageError(f"unsupported equilibrium variant {variant!r}")
    cfg = eq.OptimizerConfig(
        support=pts,
        space="sphere",
        max_iterations=iterations,
        tolerance=tolerance,
        symmetric=bool(settings.get("symmetric", False)),
    )
    res = eq.minimize_rate(spec, cfg)
    measure_path = os.path.join(out, f"equilibrium_{variant}.csv")
    write_measure_csv(measure_path, res.measure)
    summary_path = os.path.join(out, f"equilibrium_{variant}.json")
    with open(summary_path, "w") as fh:
        json.dump(
            {
                "value": res.value,
                "gap": res.gap,
                "iterations": res.iterations,
                "converged": res.converged,
            },
            fh,
            indent=2,
        )
    print(f"equilibrium[{variant}]: value={res.value:.6g} gap={res.gap:.3g} iterations={res.iterations}")
    _append_record(out, "equilibrium", settings, [measure_path, summary_path], {"total": time.time() - t0})
    return 0


def cmd_validate(settings):
    out = _out_dir(settings, "validate")
    names = None
    if settings.get("criteria"):
        names = [s.strip() for s in str(settings["criteria"]).split(",")]
    t0 = time.time()
    records = acceptance.run_all(names=names)
    report_path = os.path.join(out, "validation.json")
    payload = [rec.as_dict() for _, rec in records]
    with open(report_path, "w") as fh:
        json.dump(payload, fh, indent=2)
    _append_record(out, "validate", settings, [report_path], {"total": time.time() - t0})
    failures = [label for label, rec in records if not rec.passed]
    if failures:
        print(json.dumps({"failed": failures}))
        return 1
    return 0


_COMMON_KEYS = {"out": str, "config": str}

_COMMANDS = {
    "sample": (
        cmd_sample,
        {
            "model": str,
            "field": str,
            "n": str,
            "seeds": int,
            "grid_size": int,
            "orthogonal_table": str,
        },
    ),
    "gibbs": (
        cmd_gibbs,
        {
            "model": str,
            "field": str,
            "n": int,
            "steps": int,
            "seed": int,
            "record_every": int,
            "validate_against_direct": int,
            "orthogonal_table": str,
        },
    ),
    "rate": (
        cmd_rate,
        {
            "variant": str,
            "measure": str,
            "grid_size": int,
            "sup_size": int,
            "truncation": float,
            "center": float,
            "symmetrized": int,
        },
    ),
    "equilibrium": (
        cmd_equilibrium,
        {
            "variant": str,
            "grid_theta": int,
            "grid_phi": int,
            "iterations": int,
            "tolerance": float,
            "symmetric": int,
        },
    ),
    "validate": (cmd_validate, {"criteria": str}),
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="polygas",
        description="Random polynomial zeros as Coulomb gases: sampling, "
        "rate functionals, equilibrium measures, validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, keys) in _COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None)
        p.add_argument("--out", type=str, default=None)
        for key, cast in keys.items():
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=cast, default=None)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    handler, keys = _COMMANDS[args.command]
    all_keys = dict(keys)
    all_keys.update(_COMMON_KEYS)
    try:
        settings = _merge_config(args, all_keys)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    settings.pop("config", None)
    try:
        return handler(settings)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
