"""Run a small sweep through the experiment harness and emit the CSV table.

The same thing is available from the command line:

    fairfl run configs/quick.cfg
    fairfl summarize tradeoff_quick.csv
"""

import pathlib

from fairfl.harness import emit_tradeoff_table, load_config, run_experiment

ROOT = pathlib.Path(__file__).resolve().parent.parent

config = load_config(ROOT / "configs" / "quick.cfg", output="tradeoff_quick.csv")
records = run_experiment(config)
emit_tradeoff_table(records, config.output)

print(f"wrote {config.output}")
print(f"{'lambda':>7} {'epsilon':>8} {'seed':>5} {'error':>8} {'dp_viol':>8}")
for r in records:
    if r.summary:
        print(f"{r.lam:7.2f} {r.epsilon:8} {r.seed:>5} {r.error:8.4f} {r.dp_violation:8.4f}  <- seed mean")
