"""Spatial convergence table at alpha = 0.1: the time step is refined far
past the spatial resolution so the fourth-order spatial error dominates.
Full fidelity (--steps 10000) takes a few seconds; trim for a smoke run.
"""

import argparse

from fracadi.studies import StudyConfig, emit_outputs, emit_table, run_study


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--ladder", default="4,8,16")
    ap.add_argument("--steps", type=int, default=10000,
                    help="fixed number of time steps")
    ap.add_argument("--out", default="out/table2")
    args = ap.parse_args()

    cfg = StudyConfig(
        alphas=(args.alpha,),
        axis="spatial",
        ladder=tuple(int(m) for m in args.ladder.split(",")),
        fixed=args.steps,
        out_dir=args.out,
        emit=("table", "csv"),
    )
    result = run_study(cfg)
    print(emit_table(result.rows))
    for path in emit_outputs(cfg, result):
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
