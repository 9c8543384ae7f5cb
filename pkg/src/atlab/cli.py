"""Command-line front end.

    atlab coeffs   --model m.yaml
    atlab constant --model m.yaml
    atlab check    --model m.yaml --kind AT --C 1.5 --budget 100
    atlab decay    --model m.yaml --tmax 10 --grid 50
    atlab optimize --model m.yaml --budget 8
    atlab shearer  --model m.yaml --cover pairs
    atlab prooflab --model m.yaml --budget 20

Every command prints rows ``command,check,tag,instance,value,bound,slack,status``
(csv or json lines).  Exit status: 0 pass, 1 a checked inequality failed,
2 usage or validation error, 3 capacity exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import covers as cv
from . import prooflab as pl
from .coefficients import coefficient_report
from .dynamics import HeatBathGenerator, entropy_trace
from .errors import AtlabError, CapacityError, ValidationError
from .inequalities import EQUATION_TAGS, KINDS, check_many, estimate_optimal_constant, implication_audit
from .model import SPIN_VALUES, BirthDeathSite, GibbsModel, build_measure, poisson_site
from .rng import DENSITY_AMPLITUDES, density_trials, random_density, trial_rng
from .space import ConfigurationSpace, DEFAULT_TOL, Measure, entropy, tolerance_scale

COMMANDS = ("coeffs", "constant", "check", "decay", "optimize", "shearer", "prooflab")
FIELDS = ("command", "check", "tag", "instance", "value", "bound", "slack", "status")
EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3


@dataclass
class RunConfig:
    model_path: str
    command: str
    seed: int = 0
    budget: int = 100
    tol: float = DEFAULT_TOL
    t_max: Optional[float] = None
    grid_points: int = 50
    output_format: str = "csv"
    kind: str = "AT"
    C: Optional[float] = None
    cover: Optional[str] = None


# --- model files ------------------------------------------------------------------


def _field(entry: dict, key: str, where: str):
    if key not in entry:
        raise ValidationError(f"{where}: missing field '{key}'")
    return entry[key]


def _parse_site(entry, idx: int):
    """Returns (base weights, values, BirthDeathSite or None)."""
    where = f"sites[{idx}]"
    if not isinstance(entry, dict):
        raise ValidationError(f"{where}: expected a mapping")
    if "birth_death" in entry:
        bd = entry["birth_death"]
        if not isinstance(bd, dict):
            raise ValidationError(f"{where}.birth_death: expected a mapping")
        F = bd.get("F")
        if "poisson" in bd:
            site = poisson_site(float(bd["poisson"]), int(_field(bd, "n_max", where + ".birth_death")), F=F,
                                max_tail=float(bd.get("max_tail", 1e-12)))
        else:
            nu = np.asarray(_field(bd, "nu", where + ".birth_death"), dtype=float)
            if "n_max" in bd and int(bd["n_max"]) != nu.size - 1:
                raise ValidationError(f"{where}.birth_death.n_max disagrees with len(nu)")
            site = BirthDeathSite(nu=nu, F=F, F_bound=bd.get("F_bound"))
        return site.base, np.arange(site.n_max + 1, dtype=float), site
    if "weights" in entry:
        w = np.asarray(entry["weights"], dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValidationError(f"{where}.weights: expected a nonempty list")
        if np.any(w <= 0):
            raise ValidationError(f"{where}.weights: base weights must be positive")
        size = w.size
        if "size" in entry and int(entry["size"]) != size:
            raise ValidationError(f"{where}.size disagrees with len(weights)")
    else:
        size = int(_field(entry, "size", where))
        if size < 1:
            raise ValidationError(f"{where}.size must be positive")
        w = np.ones(size)
    if "values" in entry:
        values = np.asarray(entry["values"], dtype=float)
        if values.shape != (size,):
            raise ValidationError(f"{where}.values must have {size} entries")
    else:
        values = SPIN_VALUES.copy() if size == 2 else np.arange(size, dtype=float)
    return w / w.sum(), values, None


def _kernel_table(entry: dict, vi: np.ndarray, vj: np.ndarray, where: str) -> np.ndarray:
    if "table" in entry:
        t = np.asarray(entry["table"], dtype=float)
        if t.shape != (vi.size, vj.size):
            raise ValidationError(f"{where}.table must have shape {(vi.size, vj.size)}, got {t.shape}")
        return t
    kernel = _field(entry, "kernel", where)
    if isinstance(kernel, list):
        return _kernel_table({"table": kernel}, vi, vj, where)
    if kernel == "product":
        return np.outer(vi, vj)
    if kernel == "equality":
        return (vi[:, None] == vj[None, :]).astype(float)
    raise ValidationError(f"{where}.kernel: unknown kernel {kernel!r} (use product, equality or a table)")


def model_from_dict(data: dict) -> GibbsModel:
    if not isinstance(data, dict):
        raise ValidationError("model file must be a mapping")
    sites = _field(data, "sites", "model")
    if not isinstance(sites, list) or not sites:
        raise ValidationError("sites: expected a nonempty list")
    parsed = [_parse_site(s, i) for i, s in enumerate(sites)]
    n = len(parsed)
    base = [p[0] for p in parsed]
    values = [p[1] for p in parsed]

    fields = data.get("fields")
    if fields is not None:
        h = np.asarray(fields, dtype=float)
        if h.ndim == 0:
            h = np.full(n, float(h))
        if h.shape != (n,):
            raise ValidationError(f"fields: expected a number or {n} numbers")
        for i in range(n):
            logw = np.log(base[i]) + h[i] * values[i]
            w = np.exp(logw - logw.max())
            base[i] = w / w.sum()
        fields = list(h)

    J = np.zeros((n, n))
    pairs = {}
    couplings = data.get("couplings") or []
    if isinstance(couplings, dict):
        # dense form: {J: n x n matrix, kernel: name | table}
        M = np.asarray(_field(couplings, "J", "couplings"), dtype=float)
        if M.shape != (n, n):
            raise ValidationError(f"couplings.J must be {n}x{n}, got {M.shape}")
        if not np.allclose(M, M.T, rtol=0, atol=1e-14):
            raise ValidationError("couplings.J: asymmetric J")
        if np.any(np.diag(M) != 0):
            raise ValidationError("couplings.J: nonzero diagonal")
        spec = {k: v for k, v in couplings.items() if k != "J"}
        couplings = [dict(spec, i=i, j=j, J=M[i, j]) for i in range(n) for j in range(i + 1, n) if M[i, j] != 0]
    for c, entry in enumerate(couplings):
        where = f"couplings[{c}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where}: expected a mapping")
        i, j = int(_field(entry, "i", where)), int(_field(entry, "j", where))
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ValidationError(f"{where}: bad site pair ({i}, {j})")
        a, b = min(i, j), max(i, j)
        if (a, b) in pairs:
            if float(_field(entry, "J", where)) != J[a, b]:
                raise ValidationError(f"{where}: asymmetric J on pair ({a}, {b})")
            raise ValidationError(f"{where}: pair ({a}, {b}) declared twice")
        table = _kernel_table(entry, values[i], values[j], where)
        J[a, b] = J[b, a] = float(_field(entry, "J", where))
        pairs[(a, b)] = table if i < j else table.T

    beta = float(data.get("beta", 1.0))
    bd = [p[2] for p in parsed]
    info = {}
    if all(s is not None for s in bd):
        c0 = [s.c0 for s in bd]
        info = {"birth_death": True, "c0_per_site": c0, "c0": max(c0),
                "tail_mass": [s.tail_mass for s in bd], "F_inf": max(s.F_bound for s in bd)}
    return GibbsModel(
        space=ConfigurationSpace(tuple(b.size for b in base)),
        base=base,
        couplings=J,
        pair_functions=pairs,
        beta=beta,
        fields=fields,
        values=values,
        site_info=info,
    )


def _covers_from_dict(data: dict, n: int) -> dict:
    raw = data.get("covers")
    if raw is None:
        return {}
    if isinstance(raw, list):
        raw = {"cover0": raw}
    if not isinstance(raw, dict):
        raise ValidationError("covers: expected a list of blocks or a mapping of named covers")
    return {str(name): cv.Cover(tuple(blocks), n) for name, blocks in raw.items()}


def _read(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read model file {path}: {exc}") from exc
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ValidationError(f"model file {path} is not valid YAML/JSON: {exc}") from exc


def parse_model(path) -> GibbsModel:
    """Read a YAML or JSON model description."""
    return model_from_dict(_read(path))


def load_model(path) -> tuple[GibbsModel, dict]:
    data = _read(path)
    model = model_from_dict(data)
    return model, _covers_from_dict(data, model.n_sites)


# --- report rows ------------------------------------------------------------------


def _num(x) -> str:
    if x is None:
        return ""
    return "%.17g" % x


class Report:
    def __init__(self, command: str, tol: float):
        self.command = command
        self.tol = tol
        self.rows: list[dict] = []
        self.failed = False

    def info(self, check, tag, instance, value, bound=None):
        self._add(check, tag, instance, value, bound, None, "info")

    def assertion(self, check, tag, instance, value, bound, slack, scale):
        ok = slack >= -self.tol * scale
        self.failed |= not ok
        self._add(check, tag, instance, value, bound, slack, "pass" if ok else "fail")

    def _add(self, check, tag, instance, value, bound, slack, status):
        self.rows.append({"command": self.command, "check": check, "tag": tag, "instance": instance,
                          "value": value, "bound": bound, "slack": slack, "status": status})

    def render(self, fmt: str) -> str:
        if fmt == "json":
            lines = []
            for r in self.rows:
                parts = []
                for k in FIELDS:
                    v = r[k]
                    if isinstance(v, (float, int, np.floating)) and not isinstance(v, bool):
                        v = float(v)
                        parts.append(f'"{k}": ' + (_num(v) if math.isfinite(v) else "null"))
                    else:
                        parts.append(f'"{k}": ' + json.dumps(v))
                lines.append("{" + ", ".join(parts) + "}")
            return "\n".join(lines) + ("\n" if lines else "")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FIELDS)
        for r in self.rows:
            w.writerow([_num(r[k]) if isinstance(r[k], (float, int, np.floating)) else
                        ("" if r[k] is None else r[k]) for k in FIELDS])
        return buf.getvalue()


# --- commands ---------------------------------------------------------------------


def _proven_constant(model, mu):
    rep = coefficient_report(model, mu)
    return rep.best_constant(), rep


def _cmd_coeffs(cfg, model, mu, covers, rep):
    r = coefficient_report(model, mu)
    n = model.n_sites
    for i in range(n):
        for k in range(n):
            if i != k:
                rep.info("alpha", "Eq.2.2", f"i={i};k={k}", r.alpha[i, k])
                rep.info("delta", "Eq.2.2", f"i={i};k={k}", r.delta[i, k])
    rep.info("gamma", "Eq.2.3", "", r.gamma)
    rep.info("kappa_theorem", "Eq.2.3", "", r.kappa_theorem)
    rep.info("kappa_proof", "Eq.3.30", "", r.kappa_proof)
    rep.info("gamma+kappa_proof", "Eq.2.3", "", r.gamma + r.kappa_proof, 1.0)
    rep.info("q", "Eq.2.6", "", r.q, 2.0 / 3.0)
    for i in range(n):
        for k in range(n):
            if i == k:
                continue
            e = r.epsilon[i, k]
            ub_a, ub_d = math.exp(e), math.exp(e) - math.exp(-e)
            rep.assertion("alpha<=e^eps", "Eq.4.4", f"i={i};k={k}", r.alpha[i, k], ub_a,
                          ub_a - r.alpha[i, k], tolerance_scale(ub_a))
            rep.assertion("delta<=e^eps-e^-eps", "Eq.4.4", f"i={i};k={k}", r.delta[i, k], ub_d,
                          ub_d - r.delta[i, k], tolerance_scale(ub_d))


def _cmd_constant(cfg, model, mu, covers, rep):
    r = coefficient_report(model, mu)
    for name, tag, value, reason in (
        ("C_theorem", "Eq.2.3", r.C_theorem, r.theorem_reason),
        ("C_theorem_statement", "Eq.2.3", r.C_theorem_statement, r.theorem_reason),
        ("C_corollary", "Eq.2.6", r.C_corollary, r.corollary_reason),
        ("C_holley_stroock", "Eq.2.5", r.C_holley_stroock, "ok"),
    ):
        present = value is not None
        rep._add(name, tag, "" if present else reason, value, None, None, "present" if present else "absent")
    rep.info("q", "Eq.2.6", "", r.q, 2.0 / 3.0)
    rep.info("gamma+kappa_proof", "Eq.2.3", "", r.gamma + r.kappa_proof, 1.0)


def _require_C(cfg, model, mu, what: str) -> float:
    if cfg.C is not None:
        return cfg.C
    C, _ = _proven_constant(model, mu)
    if C is None:
        raise ValidationError(f"{what}: no proven constant applies to this model; pass --C")
    return C


def _cmd_check(cfg, model, mu, covers, rep):
    if cfg.kind == "LS" and cfg.C is None:
        raise ValidationError("check --kind LS needs an explicit --C (AT does not imply LS)")
    C = _require_C(cfg, model, mu, "check")
    v = check_many(cfg.kind, mu, C, density_trials(cfg.seed, cfg.budget, mu.space.total_size))
    rep.assertion(f"{cfg.kind}_worst_slack", EQUATION_TAGS[cfg.kind], f"trials={v.n_trials};C={_num(C)}",
                  v.worst_relative, 0.0, v.worst_relative, 1.0)


def _cmd_decay(cfg, model, mu, covers, rep):
    C = _require_C(cfg, model, mu, "decay")
    t_max = cfg.t_max if cfg.t_max is not None else 5 * C
    grid = np.linspace(0.0, t_max, cfg.grid_points)
    f = random_density(trial_rng(cfg.seed, 0), mu.space.total_size, DENSITY_AMPLITUDES[1])
    ent0 = entropy(f, mu)
    for t, e in entropy_trace(HeatBathGenerator(mu), f, grid):
        bound = math.exp(-t / C) * ent0
        rep.assertion("entropy_decay", "Eq.1.14", f"t={_num(t)};C={_num(C)}", e, bound, bound - e,
                      max(ent0, 1e-300))


def _cmd_optimize(cfg, model, mu, covers, rep):
    audit = implication_audit(mu, budget=max(1, min(cfg.budget, 16)), seed=cfg.seed)
    for k in ("P", "AT", "LS", "MLS"):
        rep.info(f"C*_{k}", EQUATION_TAGS[k], "exact" if k == "P" else "lower bound", audit.constants[k])
    for name, lhs, rhs, ok in audit.checks:
        rep._add(name, "Eq.1.16", f"eta={_num(audit.eta)}", lhs, rhs, rhs - lhs, "pass" if ok else "fail")
        rep.failed |= not ok


def _cmd_shearer(cfg, model, mu, covers, rep):
    n = model.n_sites
    if cfg.cover is not None:
        covers = {cfg.cover: covers[cfg.cover] if cfg.cover in covers else cv.named_cover(cfg.cover, n)}
    if not covers:
        covers = {name: cv.named_cover(name, n) for name in ("singletons", "complement", "pairs")}
    product = cv.is_product(mu)
    C, _ = _proven_constant(model, mu) if not product else (1.0, None)
    dens = list(density_trials(cfg.seed, cfg.budget, mu.space.total_size))
    for name, cover in covers.items():
        for t, f in enumerate(dens):
            inst = f"cover={name};trial={t}"
            if product:
                s = cv.shearer_check(mu, cover, f)
                rep.assertion("shearer", "Eq.2.14", inst, None, None, s, tolerance_scale(entropy(f, mu)))
                if all(len(b) < n for b in cover.blocks):
                    s = cv.shearer_dual_check(mu, cover, f)
                    rep.assertion("shearer_dual", "Eq.2.15", inst, None, None, s, tolerance_scale(entropy(f, mu)))
            if C is not None:
                s = cv.approx_shearer_check(mu, cover, C, f)
                rep.assertion("approx_shearer", "Eq.2.18", inst + f";C={_num(C)}", None, None, s,
                              tolerance_scale(entropy(f, mu)))
        law = Measure(mu.space, dens[0] * mu.probs / np.dot(dens[0], mu.probs)) if dens else mu
        s = cv.classical_shearer_check(law, cover)
        rep.assertion("classical_shearer", "Eq.5.4", f"cover={name}", None, None, s, 1.0)
    if product and dens:
        f = dens[0] / np.dot(dens[0], mu.probs)
        for name, cover in covers.items():
            for b in cover.blocks:
                r = cv.shannon_identity_check(mu, f, b)
                rep.assertion("shannon_identity", "Eq.5.2", f"cover={name};block={sorted(b)}", r, 0.0,
                              -abs(r), 1.0)


def _cmd_prooflab(cfg, model, mu, covers, rep):
    from .coefficients import alpha_delta

    alpha = alpha_delta(mu)[0]
    size = mu.space.total_size
    for t, f in enumerate(density_trials(cfg.seed, cfg.budget, size)):
        worst = pl.gradient_bound_sweep(f, mu, alpha)
        for name, tag in (("combined", "Eq.3.12"), ("first", "Eq.3.18"), ("second", "Eq.3.20")):
            rep.assertion(f"gradient_bound_{name}", tag, f"trial={t}", worst[name], 0.0, worst[name], 1.0)
    for k in range(model.n_sites):
        sk = mu.space.site_sizes[k]
        p = mu.marginal([k])
        for t in range(cfg.budget):
            rng = trial_rng(cfg.seed, 1, k, t)
            g = rng.uniform(0, 1, sk) ** 2
            psi = rng.normal(size=sk)
            s = pl.covariance_lemma_check(g, psi, p)
            rep.assertion("covariance_lemma", "Eq.3.22", f"k={k};trial={t}", None, None, s, 1.0)


HANDLERS = {
    "coeffs": _cmd_coeffs,
    "constant": _cmd_constant,
    "check": _cmd_check,
    "decay": _cmd_decay,
    "optimize": _cmd_optimize,
    "shearer": _cmd_shearer,
    "prooflab": _cmd_prooflab,
}


def run(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    if cfg.command not in HANDLERS:
        err.write(f"unknown command {cfg.command!r}\n")
        return EXIT_USAGE
    rep = Report(cfg.command, cfg.tol)
    try:
        model, covers = load_model(cfg.model_path)
        mu = build_measure(model)
        HANDLERS[cfg.command](cfg, model, mu, covers, rep)
    except CapacityError as exc:
        err.write(f"capacity: {exc}\n")
        return EXIT_CAPACITY
    except (AtlabError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    out.write(rep.render(cfg.output_format))
    return EXIT_FAIL if rep.failed else EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="atlab", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--model", required=True, help="YAML or JSON model description")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=100)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--grid", type=int, default=50)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--kind", choices=KINDS, default="AT")
    p.add_argument("--C", type=float, default=None)
    p.add_argument("--cover", default=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not 0 <= args.seed < 2**64:
        print("error: --seed must be a 64-bit unsigned integer", file=sys.stderr)
        return EXIT_USAGE
    if args.budget < 1 or args.grid < 2 or args.tol < 0:
        print("error: need --budget >= 1, --grid >= 2, --tol >= 0", file=sys.stderr)
        return EXIT_USAGE
    cfg = RunConfig(args.model, args.command, args.seed, args.budget, args.tol, args.tmax, args.grid,
                    args.format, args.kind, args.C, args.cover)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
