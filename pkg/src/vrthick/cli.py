"""Command-line entry point: ``vrt <group> <command> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import complexes as cx
from . import metric as mt
from . import persistence as ph
from . import sphere as sph
from . import thickening as tk
from . import transport as tr
from . import verification
from .errors import VRTError
from .metric import fmt_real


class AssertionFailed(Exception):
    def __init__(self, report: dict):
        super().__init__(report.get("message", "assertion failed"))
        self.report = report


def _emit(obj) -> None:
    print(json.dumps(verification._jsonable(obj), sort_keys=True))


def _load_space(path: str) -> mt.FiniteMetricSpace:
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("#"):
        return mt.build_space(mt.read_cloud_csv(path))
    return mt.space_from_matrix(mt.read_matrix_csv(path))


def _thickening(args, space=None) -> tk.Thickening:
    space = space if space is not None else _load_space(args.space)
    return tk.Thickening(space, args.kind, args.scale, args.convention)


# --- metric ---------------------------------------------------------------------------


def cmd_metric_validate(args):
    dist = mt.read_matrix_csv(args.matrix) if args.matrix else _load_space(args.space).dist
    report = mt.validate_metric(dist)
    _emit({"ok": report.ok, "violations": [[k, list(idx)] for k, idx in report.violations]})
    if not report.ok:
        raise AssertionFailed({"message": "metric axioms violated", "violations": len(report.violations)})


def cmd_metric_sample(args):
    if args.kind == "circle":
        cloud = mt.sample_circle(args.n, args.circumference)
    else:
        cloud = mt.sample_sphere(args.n, args.dim, args.radius, args.seed)
    if args.out:
        mt.write_cloud_csv(cloud, args.out)
    if args.matrix_out:
        mt.write_matrix_csv(mt.build_space(cloud).dist, args.matrix_out)
    if not args.out and not args.matrix_out:
        mt.write_cloud_csv(cloud, "/dev/stdout")


def cmd_metric_gh(args):
    X, Y = _load_space(args.x), _load_space(args.y)
    value, corr = mt.gh_distance_exact(X, Y)
    print(fmt_real(value))
    if args.witness:
        _emit({"correspondence": sorted(list(p) for p in corr.relation)})


def cmd_metric_hausdorff(args):
    space = _load_space(args.space)
    print(fmt_real(mt.hausdorff_distance(_ints(args.X), _ints(args.Y), space)))


# --- transport ------------------------------------------------------------------------


def cmd_transport_dist(args):
    space = _load_space(args.space)
    mu, nu = tr.load_measure(args.mu), tr.load_measure(args.nu)
    cost, plan = tr.wasserstein(mu, nu, space)
    print(fmt_real(cost))
    if args.plan_out:
        with open(args.plan_out, "w") as fh:
            json.dump(plan.to_json(), fh)


def cmd_transport_dual(args):
    space = _load_space(args.space)
    mu, nu = tr.load_measure(args.mu), tr.load_measure(args.nu)
    pot, value = tr.dual_value(mu, nu, space)
    primal = tr.wasserstein(mu, nu, space)[0]
    _emit({"dual": value, "primal": primal, "potential": {str(k): v for k, v in pot.values.items()}})
    if abs(primal - value) >= args.tol:
        raise AssertionFailed({"message": "duality gap", "gap": abs(primal - value)})


# --- complexes --------------------------------------------------------------------------


def _write_text(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_complex_build(args):
    space = _load_space(args.space)
    build = cx.vr_complex if args.command == "vr" else cx.cech_complex
    K = build(space, args.scale, args.convention, args.max_dim)
    _write_text(K.to_text(), args.out)


def cmd_complex_filtration(args):
    space = _load_space(args.space)
    build = cx.vr_filtration if args.kind == "vr" else cx.cech_filtration
    _write_text(build(space, args.max_dim).to_text(), args.out)


# --- thickenings ------------------------------------------------------------------------


def cmd_thicken_contains(args):
    th = _thickening(args)
    print(str(tk.contains(th, tr.load_measure(args.mu))).lower())


def cmd_thicken_dist(args):
    th = _thickening(args)
    print(fmt_real(tk.distance(th, tr.load_measure(args.mu), tr.load_measure(args.nu))))


def cmd_thicken_base_dist(args):
    th = _thickening(args)
    value, x = tk.distance_to_base(th, tr.load_measure(args.mu))
    _emit({"distance": value, "base_point": x, "scale": th.scale})


def cmd_thicken_escape(args):
    th = _thickening(args)
    mu = tr.load_measure(args.mu)
    th2, mu2 = tk.skeleton_escape_witness(th, mu, args.n, args.eps, args.seed)
    w = tr.wasserstein(mu, mu2, th2.space)[0]
    _emit({"measure": mu2.to_json(), "distance": w, "support_size": len(mu2),
           "contained": tk.contains(th2, mu2)})
    if args.cloud_out:
        mt.write_cloud_csv(th2.space.cloud, args.cloud_out)


def cmd_thicken_crush(args):
    fam = tk.CRUSHINGS[args.family]
    space = _load_space(args.space)
    mu = tr.load_measure(args.mu)
    bigger, image = tk.crushing_apply(fam, space, mu, args.t)
    coords = bigger.cloud.coords[list(image.support)]
    _emit({"family": fam.name, "t": args.t, "speed": fam.speed, "support": coords.tolist(),
           "weights": image.weights.tolist()})


def cmd_thicken_induced(args):
    source = _load_space(args.space)
    target_space = _load_space(args.target)
    f = tk.VertexMap(target_space, tuple(_ints(args.map)))
    target = tk.Thickening(target_space, args.kind, args.target_scale, args.convention)
    image = tk.induced_map(f, tr.load_measure(args.mu), target)
    _emit({"measure": image.to_json(), "lipschitz_constant": f.lipschitz_constant(source)})


# --- sphere -------------------------------------------------------------------------------


def _sphere_measure(args):
    space = _load_space(args.space)
    mu = tr.load_measure(args.mu)
    return space, mu, sph.SphereMeasure.from_measure(space, mu)


def cmd_sphere_critical(args):
    print(fmt_real(sph.critical_scale(args.n, args.metric, args.radius, args.circumference)))


def cmd_sphere_karcher(args):
    space, _, m = _sphere_measure(args)
    cfg = sph.KarcherConfig.for_sphere(m.radius, args.rho, tol=args.tol, max_iter=args.max_iter)
    g = sph.karcher_mean(m, cfg)
    _emit({"mean": g.vec.tolist(), "gradient_norm": float(np.linalg.norm(sph.karcher_gradient(m, g.vec)))})


def cmd_sphere_pif(args):
    _, _, m = _sphere_measure(args)
    p = sph.pi_f(m)
    _emit({"point": p.vec.tolist(), "norm_f": float(np.linalg.norm(sph.project_linear(m)))})


def cmd_sphere_track(args):
    space, mu, m = _sphere_measure(args)
    cfg = sph.KarcherConfig.for_sphere(m.radius, args.rho)
    th = tk.Thickening(space, tk.VR, args.scale, args.convention, slack=args.slack)
    th2, path = sph.hausmann_track(th, mu, cfg, args.steps)
    _emit({"steps": [nu.to_json() for nu in path], "center": th2.space.cloud.coords[-1].tolist()})


def cmd_sphere_betti(args):
    _emit({"n": args.n, "field": args.field or "Z", "reduced_homology": sph.predicted_betti(args.n, args.field)})


# --- persistence -------------------------------------------------------------------------


def cmd_ph_compute(args):
    space = _load_space(args.space)
    build = cx.vr_filtration if args.kind == "vr" else cx.cech_filtration
    D = ph.compute_ph(build(space, args.max_dim + 1), args.max_dim, args.field, args.convention)
    _write_text(D.to_csv(), args.out)


def cmd_ph_bottleneck(args):
    d1 = ph.PersistenceDiagram.from_csv(Path(args.d1).read_text())
    d2 = ph.PersistenceDiagram.from_csv(Path(args.d2).read_text())
    print(fmt_real(ph.bottleneck(d1, d2, args.dim)))


def cmd_ph_stability(args):
    rep = ph.stability_check(_load_space(args.x), _load_space(args.y), args.dim, args.field)
    _emit(rep)
    if not rep["passed"]:
        raise AssertionFailed({"message": "stability inequality violated", **rep})


def cmd_ph_circle(args):
    D, report = ph.circle_ph_experiment(args.n, args.dim, args.field)
    for dim in sorted(D.intervals):
        for b, d in D.pairs(dim):
            print(f"{dim} {fmt_real(b)} {fmt_real(d)}")
    if args.report:
        Path(args.report).write_text(json.dumps(verification._jsonable(report), sort_keys=True) + "\n")
    if args.plot_data:
        out = Path(args.plot_data)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"circle_{args.n}_diagram.csv").write_text(D.to_csv())
        if args.dim >= 3:
            conv = ph.circle_convergence(tuple(args.sizes), args.field)
            lines = ["n,birth_gap,death_gap"] + [
                f"{n},{fmt_real(b)},{fmt_real(d)}"
                for n, b, d in zip(conv["sizes"], conv["birth_gaps"], conv["death_gaps"])
            ]
            (out / "circle_h3_convergence.csv").write_text("\n".join(lines) + "\n")


# --- verify -------------------------------------------------------------------------------


def cmd_verify(args):
    names = list(verification.SUITES) if args.suite == "all" else [args.suite]
    results = [verification.run_suite(n, args.seed, args.trials) for n in names]
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.seconds:8.2f}s")
    if args.report:
        Path(args.report).write_text(json.dumps([r.to_json() for r in results], indent=1, sort_keys=True) + "\n")
    failed = [r.to_json() for r in results if not r.passed]
    if failed:
        raise AssertionFailed({"message": "verification failed", "failures": failed})


# --- parser -------------------------------------------------------------------------------


def _ints(text: str) -> list:
    return [int(v) for v in text.split(",") if v.strip()]


def _thick_opts(p, need_space=True):
    if need_space:
        p.add_argument("--space", required=True, help="cloud CSV (with '#' header) or distance-matrix CSV")
    p.add_argument("--kind", choices=[tk.VR, tk.CECH], default=tk.VR)
    p.add_argument("--scale", type=float, required=True)
    p.add_argument("--convention", choices=list(cx.CONVENTIONS), default=cx.NON_STRICT)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vrt", description="Metric thickenings of Vietoris-Rips and Čech complexes")
    groups = parser.add_subparsers(dest="group", required=True)

    g = groups.add_parser("metric").add_subparsers(dest="command", required=True)
    p = g.add_parser("validate")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix")
    src.add_argument("--space")
    p.set_defaults(func=cmd_metric_validate)
    p = g.add_parser("sample")
    p.add_argument("--kind", choices=["circle", "sphere"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--circumference", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--matrix-out")
    p.set_defaults(func=cmd_metric_sample)
    p = g.add_parser("gh")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--witness", action="store_true")
    p.set_defaults(func=cmd_metric_gh)
    p = g.add_parser("hausdorff")
    p.add_argument("--space", required=True)
    p.add_argument("--X", required=True, help="comma-separated indices")
    p.add_argument("--Y", required=True)
    p.set_defaults(func=cmd_metric_hausdorff)

    g = groups.add_parser("transport").add_subparsers(dest="command", required=True)
    for name, fn in (("dist", cmd_transport_dist), ("dual", cmd_transport_dual)):
        p = g.add_parser(name)
        p.add_argument("--space", required=True)
        p.add_argument("--mu", required=True)
        p.add_argument("--nu", required=True)
        if name == "dist":
            p.add_argument("--plan-out")
        else:
            p.add_argument("--tol", type=float, default=1e-9)
        p.set_defaults(func=fn)

    g = groups.add_parser("complex").add_subparsers(dest="command", required=True)
    for name in ("vr", "cech"):
        p = g.add_parser(name)
        p.add_argument("--space", required=True)
        p.add_argument("--scale", type=float, required=True)
        p.add_argument("--convention", choices=list(cx.CONVENTIONS), default=cx.NON_STRICT)
        p.add_argument("--max-dim", type=int, default=2)
        p.add_argument("--out")
        p.set_defaults(func=cmd_complex_build)
    p = g.add_parser("filtration")
    p.add_argument("--space", required=True)
    p.add_argument("--kind", choices=["vr", "cech"], default="vr")
    p.add_argument("--max-dim", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_complex_filtration)

    g = groups.add_parser("thicken").add_subparsers(dest="command", required=True)
    p = g.add_parser("contains")
    _thick_opts(p)
    p.add_argument("--mu", required=True)
    p.set_defaults(func=cmd_thicken_contains)
    p = g.add_parser("dist")
    _thick_opts(p)
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.set_defaults(func=cmd_thicken_dist)
    p = g.add_parser("base-dist")
    _thick_opts(p)
    p.add_argument("--mu", required=True)
    p.set_defaults(func=cmd_thicken_base_dist)
    p = g.add_parser("escape")
    _thick_opts(p)
    p.add_argument("--mu", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cloud-out")
    p.set_defaults(func=cmd_thicken_escape)
    p = g.add_parser("crush")
    p.add_argument("--family", choices=sorted(tk.CRUSHINGS), required=True)
    p.add_argument("--space", required=True, help="cloud CSV of points of the family's domain")
    p.add_argument("--mu", required=True)
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(func=cmd_thicken_crush)
    p = g.add_parser("induced")
    p.add_argument("--space", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--map", required=True, help="comma-separated target index of each source point")
    p.add_argument("--mu", required=True)
    p.add_argument("--kind", choices=[tk.VR, tk.CECH], default=tk.VR)
    p.add_argument("--target-scale", type=float, default=float("inf"))
    p.add_argument("--convention", choices=list(cx.CONVENTIONS), default=cx.NON_STRICT)
    p.set_defaults(func=cmd_thicken_induced)

    g = groups.add_parser("sphere").add_subparsers(dest="command", required=True)
    p = g.add_parser("critical")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--metric", choices=["geodesic", "euclidean"], default="geodesic")
    size = p.add_mutually_exclusive_group()
    size.add_argument("--radius", type=float)
    size.add_argument("--circumference", type=float)
    p.set_defaults(func=cmd_sphere_critical)
    p = g.add_parser("karcher")
    p.add_argument("--space", required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--rho", type=float)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.set_defaults(func=cmd_sphere_karcher)
    p = g.add_parser("pif")
    p.add_argument("--space", required=True)
    p.add_argument("--mu", required=True)
    p.set_defaults(func=cmd_sphere_pif)
    p = g.add_parser("track")
    p.add_argument("--space", required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--scale", type=float, required=True)
    p.add_argument("--convention", choices=list(cx.CONVENTIONS), default=cx.NON_STRICT)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--rho", type=float)
    p.add_argument("--slack", type=float, default=1e-9)
    p.set_defaults(func=cmd_sphere_track)
    p = g.add_parser("betti")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--field", type=int)
    p.set_defaults(func=cmd_sphere_betti)

    g = groups.add_parser("ph").add_subparsers(dest="command", required=True)
    p = g.add_parser("compute")
    p.add_argument("--space", required=True)
    p.add_argument("--kind", choices=["vr", "cech"], default="vr")
    p.add_argument("--max-dim", type=int, default=1, help="top homological dimension")
    p.add_argument("--field", type=int, default=2)
    p.add_argument("--convention", choices=list(cx.CONVENTIONS), default=cx.NON_STRICT)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ph_compute)
    p = g.add_parser("bottleneck")
    p.add_argument("--d1", required=True)
    p.add_argument("--d2", required=True)
    p.add_argument("--dim", type=int, default=0)
    p.set_defaults(func=cmd_ph_bottleneck)
    p = g.add_parser("stability")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--field", type=int, default=2)
    p.set_defaults(func=cmd_ph_stability)
    p = g.add_parser("circle-experiment")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--field", type=int, default=2)
    p.add_argument("--sizes", type=int, nargs="+", default=[12, 16, 20])
    p.add_argument("--report")
    p.add_argument("--plot-data", help="directory for CSV series files")
    p.set_defaults(func=cmd_ph_circle)

    g = groups.add_parser("verify")
    g.add_argument("suite", choices=["all"] + list(verification.SUITES))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--trials", type=int, help="override every suite's default trial count")
    g.add_argument("--report", help="write per-suite JSON results here")
    g.set_defaults(func=cmd_verify)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except AssertionFailed as exc:
        _emit({"status": "failed", **exc.report})
        return 1
    except (VRTError, ValueError, KeyError, OSError) as exc:
        _emit({"status": "error", "error": type(exc).__name__, "message": str(exc)})
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
