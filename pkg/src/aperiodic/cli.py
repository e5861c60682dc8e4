"""Experiment orchestration: validated JSON configs, deterministic runs,
CSV/JSON emission, and the reproducibility re-check.

Every run is a pure function of (config, seed): outputs are byte-identical
across repeats, files are written to a temp name and renamed so partial
outputs never land, and the ``report`` subcommand re-derives every estimate
from the emitted CSV to prove there is no hidden state.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import random
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import bernoulli as bern
from . import complexity as cx
from . import hyperbolic as hyp
from . import periodic as per
from . import torus as tor
from .core import geometric_grid, is_resolved, shift_profile
from .errors import ConfigError, ExhaustedError

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CHECK_FAILURES = 1
EXIT_CONFIG_ERROR = 2


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    system: dict
    grid: dict = field(default_factory=dict)
    horizons: dict = field(default_factory=dict)
    registry: dict = field(default_factory=dict)
    lengths: list = field(default_factory=list)
    options: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError("config", f"file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError("config", f"invalid JSON: {e}")
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if raw.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError("schema_version",
                              f"expected {SCHEMA_VERSION}, got {raw.get('schema_version')}")
        if "system" not in raw or "kind" not in raw.get("system", {}):
            raise ConfigError("system.kind", "missing system kind")
        cfg = cls(system=raw["system"], grid=raw.get("grid", {}),
                  horizons=raw.get("horizons", {}),
                  registry=raw.get("registry", {}),
                  lengths=raw.get("lengths", []),
                  options=raw.get("options", {}))
        cfg.validate()
        return cfg

    def validate(self):
        kind = self.system.get("kind")
        if kind not in ("torus", "bernoulli", "hyperbolic"):
            raise ConfigError("system.kind", f"unknown system {kind!r}")
        for name, value in self.horizons.items():
            if not (isinstance(value, int) and value > 0):
                raise ConfigError(f"horizons.{name}", "must be a positive integer")
        if self.grid:
            eps = self.epsilon_grid()
            for a, b in zip(eps, eps[1:]):
                if not b < a:
                    raise ConfigError("grid", "epsilon grid must be strictly decreasing")
        for l in self.lengths:
            if not (isinstance(l, int) and l >= 0):
                raise ConfigError("lengths", "lengths must be naturals")
        mp = self.registry.get("max_period")
        if mp is not None and not (isinstance(mp, int) and mp > 0):
            raise ConfigError("registry.max_period", "must be a positive integer")

    def epsilon_grid(self) -> tuple:
        if "epsilons" in self.grid:
            eps = tuple(float(e) for e in self.grid["epsilons"])
            if any(e <= 0 for e in eps):
                raise ConfigError("grid.epsilons", "grid values must be positive")
            return eps
        eps_max = self.grid.get("eps_max", 0.5)
        ratio = self.grid.get("ratio", 0.5)
        count = self.grid.get("count", 10)
        if not eps_max > 0:
            raise ConfigError("grid.eps_max", "must be positive")
        if not 0 < ratio < 1:
            raise ConfigError("grid.ratio", "must lie in (0, 1)")
        if not (isinstance(count, int) and count >= 1):
            raise ConfigError("grid.count", "must be a positive integer")
        return geometric_grid(eps_max, ratio, count)

    def horizon(self, key: str, default: int) -> int:
        return int(self.horizons.get(key, default))


def build_system(cfg: ExperimentConfig):
    spec = cfg.system
    kind = spec["kind"]
    if kind == "torus":
        alpha = spec.get("alpha", "golden")
        cf = None
        if alpha == "golden":
            cf = tor.ContinuedFraction.golden()
            value = (cf.value(),)
        elif alpha == "silver":
            cf = tor.ContinuedFraction.silver()
            value = (cf.value(),)
        elif isinstance(alpha, list) and all(isinstance(a, int) for a in alpha):
            cf = tor.ContinuedFraction(quotients=tuple(alpha))
            value = (cf.value(),)
        elif isinstance(alpha, (int, float)):
            value = (float(alpha),)
        elif isinstance(alpha, list):
            value = tuple(float(a) for a in alpha)
        else:
            raise ConfigError("system.alpha", f"cannot interpret {alpha!r}")
        return tor.TorusRotation(value, continued_fraction=cf)
    if kind == "bernoulli":
        n = spec.get("n", 2)
        if not (isinstance(n, int) and n >= 1):
            raise ConfigError("system.n", "alphabet size must be a positive integer")
        return bern.BernoulliShift(n)
    length = spec.get("length", (1 + math.sqrt(5)) / 2)
    if not (isinstance(length, (int, float)) and length > 0):
        raise ConfigError("system.length", "translation length must be positive")
    return hyp.CyclicQuotientGeodesic(float(length),
                                      tube_radius=spec.get("tube_radius", 0.5))


def start_state(cfg: ExperimentConfig, sys_obj):
    spec = cfg.system
    if isinstance(sys_obj, tor.TorusRotation):
        return sys_obj.state(base=spec.get("base"))
    if isinstance(sys_obj, bern.BernoulliShift):
        text = spec.get("word")
        if text is not None:
            return sys_obj.word(text)
        rng = random.Random(spec.get("word_seed", 7))
        block = tuple(rng.randint(1, sys_obj.n) for _ in range(37))
        return bern.SymbolWord.periodic(sys_obj.n, block)
    return sys_obj.state_at(float(spec.get("phase", 0.0)))


# ---------------------------------------------------------------------------
# Deterministic emission
# ---------------------------------------------------------------------------

def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def run_profile(cfg, out, seed, threads, verbose):
    sys_obj = build_system(cfg)
    x = start_state(cfg, sys_obj)
    grid = cfg.epsilon_grid()
    horizon = cfg.horizon("N", 10_000)
    s_max = cfg.horizon("s_max", 100_000)
    lengths = cfg.lengths or [0]

    def one(l):
        return shift_profile(sys_obj, x, grid, l, horizon, s_max)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            profiles = list(pool.map(one, lengths))
    else:
        profiles = [one(l) for l in lengths]

    rows = []
    for prof in profiles:
        for eps, v in zip(prof.epsilon_grid, prof.values):
            rows.append((eps, prof.length, v if is_resolved(v) else "unresolved"))
    _atomic_write(os.path.join(out, "profile.csv"),
                  _csv_text(("epsilon", "l", "value"), rows))

    estimates = {}
    base = next((p for p in profiles if p.length == 0), None)
    if base is not None:
        try:
            est = cx.growth_rate_F(base)
            estimates["scale_growth"] = est.to_dict()
        except Exception as e:
            estimates["scale_growth"] = {"error": str(e)}
    if len(profiles) >= 5:
        for eps in grid:
            try:
                est = cx.growth_rate_G(profiles, eps)
            except Exception:
                continue
            estimates.setdefault("length_growth", {})[repr(eps)] = est.to_dict()
    _atomic_write(os.path.join(out, "estimates.json"), _json_text(estimates))

    plot_rows = [(-math.log(eps), math.log(v), l)
                 for (eps, l, v) in rows if v != "unresolved"]
    _atomic_write(os.path.join(out, "plotdata.csv"),
                  _csv_text(("minus_log_eps", "log_value", "l"), plot_rows))
    return EXIT_OK


def _torus_candidates(sys_obj, seed, count):
    rng = random.Random(seed)
    states = sys_obj.orbit(sys_obj.state(), count // 2)
    states += [sys_obj.state(base=tuple(rng.random() for _ in range(sys_obj.n)))
               for _ in range(count - len(states))]
    return states


def candidate_cloud(cfg, sys_obj, seed: int, count: int, depth: int):
    if isinstance(sys_obj, bern.BernoulliShift):
        return sys_obj.sliding_candidates(seed, count, depth)
    if isinstance(sys_obj, tor.TorusRotation):
        return _torus_candidates(sys_obj, seed, count)
    return sys_obj.candidate_cloud(seed, count)


def run_dimension(cfg, out, seed, threads, verbose):
    sys_obj = build_system(cfg)
    grid = cfg.epsilon_grid()
    count = int(cfg.options.get("candidates", 4096))
    depth = bern_depth(sys_obj, grid, 0)
    cloud = candidate_cloud(cfg, sys_obj, seed, count, depth)
    counts = cx.net_counts(sys_obj, cloud, grid, l=0)
    est = cx.box_dimension_estimate(sys_obj, cloud, grid)
    kind = cfg.system["kind"]
    _atomic_write(os.path.join(out, "counts.csv"),
                  _csv_text(("system", "quantity", "epsilon_or_l", "count"),
                            [(kind, "net_size", e, c) for e, c in counts]))
    _atomic_write(os.path.join(out, "estimates.json"),
                  _json_text({"box_dimension": est.to_dict()}))
    _atomic_write(os.path.join(out, "plotdata.csv"),
                  _csv_text(("minus_log_eps", "log_count"),
                            [(-math.log(e), math.log(c)) for e, c in counts]))
    return EXIT_OK


def bern_depth(sys_obj, grid, l_max):
    if not isinstance(sys_obj, bern.BernoulliShift):
        return 0
    deepest = max(bern.eps_exponent_min(eps) for eps in grid)
    return l_max + deepest + 1


def run_entropy(cfg, out, seed, threads, verbose):
    sys_obj = build_system(cfg)
    eps = float(cfg.options.get("epsilon", math.exp(-1)))
    lengths = cfg.lengths or list(range(2, 13))
    count = int(cfg.options.get("candidates", 65536))
    depth = bern_depth(sys_obj, (eps,), max(lengths))
    cloud = candidate_cloud(cfg, sys_obj, seed, count, depth)
    counts = cx.bowen_net_counts(sys_obj, cloud, eps, lengths)
    est = cx.topological_entropy_estimate(sys_obj, cloud, eps, lengths)
    kind = cfg.system["kind"]
    _atomic_write(os.path.join(out, "counts.csv"),
                  _csv_text(("system", "quantity", "epsilon_or_l", "count"),
                            [(kind, "bowen_net_size", l, c) for l, c in counts]))
    _atomic_write(os.path.join(out, "estimates.json"),
                  _json_text({"topological_entropy": est.to_dict(),
                              "epsilon": repr(eps)}))
    _atomic_write(os.path.join(out, "plotdata.csv"),
                  _csv_text(("l", "log_count"),
                            [(l, math.log(c)) for l, c in counts]))
    return EXIT_OK


def run_torus(cfg, out, seed, threads, verbose):
    sys_obj = build_system(cfg)
    if not isinstance(sys_obj, tor.TorusRotation):
        raise ConfigError("system.kind", "torus subcommand needs a torus system")
    s_max = cfg.horizon("s_max", 100_000)
    alpha = sys_obj.alpha
    payload = {
        "alpha": list(alpha),
        "badly_approximable_constant":
            tor.badly_approximable_constant(alpha, sys_obj.n, s_max),
        "uniform_floor": list(tor.uniform_approximation_floor(alpha, sys_obj.n, s_max)),
    }
    if sys_obj.cf is not None:
        payload["convergent_scaled_errors"] = [
            [p, q, v] for p, q, v in sys_obj.cf.scaled_convergent_errors(s_max)]
    rng = random.Random(seed)
    witnesses = []
    for _ in range(int(cfg.options.get("witnesses", 5))):
        s = rng.randint(2, 50)
        gap = tor._lattice_distance(tuple(s * a for a in alpha))
        eps = gap * rng.uniform(1.5, 3.0) + 1e-12
        point, cert = tor.torus_closing_witness((0.0,) * sys_obj.n, alpha, s, eps)
        witnesses.append(cert)
    payload["closing_witnesses"] = witnesses
    _atomic_write(os.path.join(out, "torus.json"), _json_text(payload))
    return EXIT_OK


def run_bernoulli(cfg, out, seed, threads, verbose):
    sys_obj = build_system(cfg)
    if not isinstance(sys_obj, bern.BernoulliShift):
        raise ConfigError("system.kind", "bernoulli subcommand needs a bernoulli system")
    delta = float(cfg.options.get("delta", 0.5))
    target = int(cfg.options.get("target_length", 200))
    rate = delta * math.log(sys_obj.n) if sys_obj.n > 1 else 1.0

    def phi(l):
        return math.ceil(math.exp(rate * l))

    payload = {"delta": delta, "target_length": target}
    try:
        l0, word = bern.search_with_l0_sweep(sys_obj.n, phi, target, seed=seed)
        # every triple with n + s + l within the prefix is decidable
        w = target // 3
        cert = bern.is_phi_aperiodic(word, phi, l0, horizon=w, s_max=w,
                                     l_max=w)
        payload.update({"l0": l0, "word": word.to_string(),
                        "status": cert.status,
                        "window": cert.window,
                        "undecidable": cert.undecidable})
        code = EXIT_OK if cert.holds else EXIT_CHECK_FAILURES
    except ExhaustedError as e:
        payload.update({"status": "exhausted", "nodes": e.nodes,
                        "max_depth": e.max_depth})
        code = EXIT_CHECK_FAILURES
    _atomic_write(os.path.join(out, "bernoulli.json"), _json_text(payload))
    return code


def run_hyperbolic(cfg, out, seed, threads, verbose):
    rng = random.Random(seed)
    instances = int(cfg.options.get("instances", 100))
    eps_values = cfg.options.get("eps0", [0.05, 0.1, 0.2])
    results = {"conclusion_failures": 0, "non_instances": 0, "checked": 0,
               "min_sandwich_slack": math.inf, "min_tube_margin": math.inf}
    for _ in range(instances):
        eps0 = rng.choice(eps_values)
        inst = hyp.build_closing_instance(rng, eps0)
        try:
            rep = hyp.closing_lemma_check(inst["gamma"], inst["psi"], eps0,
                                          inst["s"], inst["l"])
        except (hyp.HypothesisFailedError, hyp.PreconditionFailedError):
            results["non_instances"] += 1
            continue
        results["checked"] += 1
        if not rep["ok"]:
            results["conclusion_failures"] += 1
        results["min_sandwich_slack"] = min(results["min_sandwich_slack"],
                                            *rep["sandwich_slacks"])
        results["min_tube_margin"] = min(results["min_tube_margin"],
                                         rep["tube_margin"])
    generators = [hyp.Isometry(*row)
                  for row in cfg.options.get("generators", [])]
    if generators:
        radius = int(cfg.options.get("word_radius", 5))
        l_values = cfg.options.get("count_lengths", list(range(2, 15, 2)))
        est = hyp.orbital_growth_estimate(generators, 2.0 + 2.0j, l_values,
                                          radius)
        results["orbital_growth"] = est.to_dict()
        results["min_translation_length"] = \
            hyp.min_translation_length(generators, min(radius, 3))
    _atomic_write(os.path.join(out, "checks.json"), _json_text(results))
    return EXIT_OK if results["conclusion_failures"] == 0 else EXIT_CHECK_FAILURES


def run_check_closing(cfg, out, seed, threads, verbose):
    sys_obj = build_system(cfg)
    rng = random.Random(seed)
    events = int(cfg.options.get("events", 1000))
    extra_registry = []
    registry_path = cfg.registry.get("path")
    if registry_path:
        with open(registry_path) as fh:
            extra_registry = per.registry_from_json(sys_obj, fh.read())
    if isinstance(sys_obj, tor.TorusRotation):
        report = _torus_closing_suite(sys_obj, rng, events, extra_registry)
    elif isinstance(sys_obj, bern.BernoulliShift):
        report = _bernoulli_closing_suite(sys_obj, rng, events,
                                          int(cfg.registry.get("max_period", 8)),
                                          extra_registry)
    else:
        raise ConfigError("system.kind", "closing checks run on torus or bernoulli")
    _atomic_write(os.path.join(out, "checks.json"), report.to_json() + "\n")
    return EXIT_OK if report.ok else EXIT_CHECK_FAILURES


def _torus_closing_suite(sys_obj, rng, count, extra_registry=()):
    delta = per.ClosingFunction.from_scale(2.0)
    events = []
    registry = list(extra_registry)
    for _ in range(count):
        alpha = sys_obj.alpha
        base = tuple(rng.random() for _ in range(sys_obj.n))
        s = rng.randint(1, 200)
        gap = tor._lattice_distance(tuple(s * a for a in alpha))
        if gap == 0:
            continue
        eps = gap * rng.uniform(1.001, 2.0)
        state = (base, alpha)
        events.append((state, s, eps))
        p = tuple(round(s * a) for a in alpha)
        registry.append(per.PeriodicPoint(state=(base, tuple(pi / s for pi in p)),
                                          period=s, residual=0.0, primitive=None))
    return per.check_delta_closing(sys_obj, delta, registry, events)


def _bernoulli_closing_suite(sys_obj, rng, count, max_period, extra_registry=()):
    registry = sys_obj.periodic_registry(max_period) + list(extra_registry)
    delta = per.StrongClosingFunction.length_offset()
    events = []
    for _ in range(count):
        s = rng.randint(1, max_period)
        l = rng.randint(0, 10)
        k = rng.randint(0, 4)
        eps = math.exp(-(k + 1)) * 1.0000001
        head = [rng.randint(1, sys_obj.n) for _ in range(s)]
        need = s + l + k
        prefix = [head[i % s] for i in range(need)]
        tail = tuple(rng.randint(1, sys_obj.n) for _ in range(7))
        word = bern.SymbolWord(sys_obj.n, tuple(prefix), tail)
        events.append((word, s, l, eps))
    return per.check_strong_delta_closing(sys_obj, delta, registry, events)


def run_report(cfg_path, out, seed, threads, verbose):
    """Re-derive estimates from the emitted CSVs and compare."""
    est_path = os.path.join(out, "estimates.json")
    if not os.path.exists(est_path):
        print(f"no estimates.json under {out}", file=sys.stderr)
        return EXIT_CHECK_FAILURES
    with open(est_path) as fh:
        stored = json.load(fh)
    mismatches = []
    profile_path = os.path.join(out, "profile.csv")
    if os.path.exists(profile_path) and "scale_growth" in stored \
            and "slope" in stored["scale_growth"]:
        samples = []
        with open(profile_path) as fh:
            for row in csv.DictReader(fh):
                if row["value"] != "unresolved" and int(row["l"]) == 0:
                    samples.append((-math.log(float(row["epsilon"])),
                                    math.log(float(row["value"]))))
        est = cx.fit_growth_rate(samples)
        if abs(est.slope - stored["scale_growth"]["slope"]) > 1e-12:
            mismatches.append("scale_growth slope not reproducible from CSV")
        else:
            print(f"scale_growth slope {est.slope:.6f} reproduced from profile.csv")
    for name in ("box_dimension", "topological_entropy"):
        if name in stored:
            counts_path = os.path.join(out, "counts.csv")
            if not os.path.exists(counts_path):
                continue
            with open(counts_path) as fh:
                rows = [(float(r["epsilon_or_l"]), float(r["count"]))
                        for r in csv.DictReader(fh)]
            if name == "box_dimension":
                samples = [(-math.log(e), math.log(c)) for e, c in rows]
            else:
                samples = [(l, math.log(c)) for l, c in rows]
            est = cx.fit_growth_rate(samples)
            if abs(est.slope - stored[name]["slope"]) > 1e-12:
                mismatches.append(f"{name} slope not reproducible from CSV")
            else:
                print(f"{name} slope {est.slope:.6f} reproduced from counts.csv")
    for m in mismatches:
        print("MISMATCH:", m, file=sys.stderr)
    return EXIT_CHECK_FAILURES if mismatches else EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_RUNNERS = {
    "profile": run_profile,
    "dimension": run_dimension,
    "entropy": run_entropy,
    "torus": run_torus,
    "bernoulli": run_bernoulli,
    "hyperbolic": run_hyperbolic,
    "check-closing": run_check_closing,
}


def run_experiment(cfg: ExperimentConfig, command: str, out: str,
                   seed: int = 0, threads: int = 1,
                   verbose: bool = False) -> int:
    """Programmatic entry: run one subcommand, return its exit status."""
    if command not in _RUNNERS:
        raise ConfigError("command", f"unknown experiment {command!r}")
    os.makedirs(out, exist_ok=True)
    return _RUNNERS[command](cfg, out, seed, threads, verbose)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="aperiodic",
        description="quantitative-recurrence experiments on three model systems")
    parser.add_argument("command", choices=sorted(_RUNNERS) + ["report"])
    parser.add_argument("--config", required=False, help="JSON config path")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=".")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    os.makedirs(args.out, exist_ok=True)
    try:
        if args.command == "report":
            return run_report(args.config, args.out, args.seed, args.threads,
                              args.verbose)
        if args.config is None:
            raise ConfigError("config", "--config is required for this command")
        cfg = ExperimentConfig.from_file(args.config)
        return _RUNNERS[args.command](cfg, args.out, args.seed, args.threads,
                                      args.verbose)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
