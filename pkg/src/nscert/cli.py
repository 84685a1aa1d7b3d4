"""Command-line client for the certification service.

The CLI is a thin client: every subcommand marshals its arguments into a
service request and renders the response.  By default the app is driven
in-process over an ASGI transport (no server needed); ``--url`` points the
same commands at a remote instance started with ``nscert serve``.

Exit status: 0 = certified / all pass, 2 = refused or golden mismatch
(with diagnostics printed), 1 = error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx


def _client(url: str | None) -> httpx.Client:
    if url:
        return httpx.Client(base_url=url, timeout=3600.0)
    from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app, raise_server_exceptions=False)


class CliError(Exception):
    pass


def _post(args, path: str, payload: dict) -> dict:
    with _client(args.url) as client:
        resp = client.post(path, json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except Exception:
            detail = resp.text
        raise CliError(str(detail))
    return resp.json()


def _scenario_payload(args) -> dict:
    if getattr(args, "paper_scenario", None):
        from .workflows import paper_scenarios

        scn = paper_scenarios()[args.paper_scenario]
        doc = {
            "d": scn.d, "n": scn.n, "p": scn.p, "mode": scn.mode, "horizon": scn.horizon,
            "datum": {"norm_n": scn.datum_norm_n, "norm_p": scn.datum_norm_p, "seed": scn.datum_seed or 0},
            "forcing": {"kind": scn.forcing_kind, "level_n": scn.forcing_level_n, "level_p": scn.forcing_level_p},
        }
    else:
        doc = json.loads(Path(args.scenario).read_text(encoding="utf-8"))
    if getattr(args, "g_box", None):
        doc["galerkin"] = {"box_radius": args.g_box}
    # the service model requires a datum object
    doc.setdefault("datum", {})
    return doc


def _write_maybe(path: str | None, content: str, label: str) -> None:
    if path:
        Path(path).write_text(content, encoding="utf-8")
        print(f"wrote {label} to {path}")


def cmd_constants(args) -> int:
    payload = {
        "d": args.d,
        "n_list": [float(x) for x in args.n.split(",")],
        "lattice": args.lattice,
        "reduced": args.reduced,
    }
    if args.box is not None:
        payload["search_box"] = args.box
    if args.lambda_sigma is not None:
        payload["lambda_sigma"] = args.lambda_sigma
    out = _post(args, "/constants", payload)
    print(out["csv"], end="")
    for row in out["rows"]:
        print(
            f"# K_{row['n']:g} = {row['K']:g}  (sup over box <= {row['sup_box_hi']:.6g}, "
            f"limit sum in [{row['sigma_lo']:.6g}, {row['sigma_hi']:.6g}])"
        )
        print(f"#   {row['evidence_note']}")
    print(f"# elapsed: {out['elapsed_seconds']:.2f} s")
    _write_maybe(args.csv, out["csv"], "constants CSV")
    return 0


def cmd_certify(args) -> int:
    doc = _scenario_payload(args)
    out = _post(args, "/certify", {"scenario": doc, "grid_fallback": not args.no_fallback})
    print(out["report"], end="")
    _write_maybe(args.csv, out["csv"], "tube CSV")
    return 0 if out["status"] == "certified" else 2


def cmd_run(args) -> int:
    doc = _scenario_payload(args)
    payload = {
        "scenario": doc,
        "g_radius": args.g_radius,
        "ref_radius": args.ref_radius,
        "horizon": args.horizon,
        "rtol": args.rtol,
        "n_samples": args.samples,
        "force": args.force,
        "dump_times": [float(x) for x in args.dump_times.split(",")] if args.dump_times else None,
    }
    out = _post(args, "/run", payload)
    det = out["details"]
    if out["status"] == "refused":
        print("scenario refused; rerun with --force to integrate anyway")
        for r in det["certify"]["refusals"]:
            print(f"  {r['name']}: lhs = {r['lhs']:.6g} > {r['bound']:g}")
        return 2
    print(f"integrated to t = {det['horizon_run']:g} at |G| = {det['g_resolution']:.4g}")
    if "energy" in det:
        print(f"energy: max increase {det['energy']['max_energy_increase']:.3g}, "
              f"balance residual {det['energy']['max_energy_residual']:.3g}")
    if "containment_margin_triangle" in det:
        print(f"containment margin (tube + reference tube - measured): "
              f"{det['containment_margin_triangle']:.6g}")
        print(f"containment margin (tube alone): {det['containment_margin_strict']:.6g}")
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "trajectory.csv").write_text(det["trajectory_csv"], encoding="utf-8")
    written = ["trajectory.csv"]
    for key, fname in (("tube_csv", "tube.csv"), ("containment_csv", "containment.csv")):
        if key in det:
            (outdir / fname).write_text(det[key], encoding="utf-8")
            written.append(fname)
    for label, text in det.get("field_dumps", {}).items():
        fname = f"field_t{label}.txt"
        (outdir / fname).write_text(text, encoding="utf-8")
        written.append(fname)
    print(f"wrote {', '.join(written)} to {outdir}/")
    return 0


def cmd_reproduce(args) -> int:
    out = _post(args, "/reproduce-paper", {})
    print(out["table"], end="")
    return 0 if out["all_pass"] else 2


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("nscert.service.app:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nscert", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--url", default=None, help="remote service URL (default: run in-process)")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="certified advection constants and lattice-sum brackets")
    c.add_argument("--d", type=int, default=3)
    c.add_argument("--n", default="2,4", help="comma-separated Sobolev indices")
    c.add_argument("--lattice", default="nonzero", choices=["nonzero", "full"])
    c.add_argument("--box", type=int, default=None, help="search box radius for the kernel sup")
    c.add_argument("--lambda-sigma", type=float, default=None, dest="lambda_sigma")
    c.add_argument("--reduced", action="store_true", help="fast mode: lambda = 60, small box")
    c.add_argument("--csv", default=None, help="write the CSV table to this path")
    c.set_defaults(func=cmd_constants)

    def add_scenario_source(p):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--scenario", help="path to a scenario JSON document")
        g.add_argument("--paper-scenario", type=int, choices=[1, 2, 3],
                       help="one of the built-in reference scenarios")

    ce = sub.add_parser("certify", help="run the certificate chain on a scenario")
    add_scenario_source(ce)
    ce.add_argument("--g-box", type=int, default=None, help="override the retained-set box radius")
    ce.add_argument("--no-fallback", action="store_true", help="skip the grid solver on refusal")
    ce.add_argument("--csv", default=None, help="write tube samples to this path")
    ce.set_defaults(func=cmd_certify)

    r = sub.add_parser("run", help="integrate the retained-mode system and check containment")
    add_scenario_source(r)
    r.add_argument("--g-radius", type=int, required=True)
    r.add_argument("--ref-radius", type=int, default=None)
    r.add_argument("--horizon", type=float, default=None)
    r.add_argument("--rtol", type=float, default=1e-8)
    r.add_argument("--samples", type=int, default=20)
    r.add_argument("--force", action="store_true", help="integrate even when the scenario is refused")
    r.add_argument("--dump-times", default=None,
                   help="comma-separated times at which to dump the full spectral state")
    r.add_argument("--out-dir", default="nscert-run")
    r.set_defaults(func=cmd_run)

    rp = sub.add_parser("reproduce-paper", help="recompute the reference goldens and print PASS/FAIL")
    rp.set_defaults(func=cmd_reproduce)

    sv = sub.add_parser("serve", help="start the HTTP service")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8000)
    sv.set_defaults(func=cmd_serve)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:  # surface a clean one-liner, keep exit code 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
