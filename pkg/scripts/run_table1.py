"""Temporal convergence table: e_inf and observed order against the step
count, one block per alpha.  Writes study_table.txt and study.csv under
--out and prints the table.
"""

import argparse

from fracadi.studies import StudyConfig, emit_outputs, emit_table, run_study


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", default="0.25,0.5,0.75")
    ap.add_argument("--ladder", default="5,10,20,40,80")
    ap.add_argument("--cells", type=int, default=16,
                    help="fixed spatial resolution (cells per side)")
    ap.add_argument("--out", default="out/table1")
    args = ap.parse_args()

    cfg = StudyConfig(
        alphas=tuple(float(a) for a in args.alphas.split(",")),
        axis="temporal",
        ladder=tuple(int(n) for n in args.ladder.split(",")),
        fixed=args.cells,
        out_dir=args.out,
        emit=("table", "csv"),
    )
    result = run_study(cfg)
    print(emit_table(result.rows))
    for path in emit_outputs(cfg, result):
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
