"""Library-level sweep and curve export (the same code paths the CLI uses)."""
import tempfile
from pathlib import Path

from vanetsim import cli
from vanetsim.analytic import CurveSpec
from vanetsim.config import RunConfig, SweepSpec

out = Path(tempfile.mkdtemp(prefix="vanetsim-demo-"))

spec = SweepSpec(protocols=("olsr", "dymo"), macs=("802.11p",), node_counts=(25,),
                 speeds=(2.0, 30.0), seeds=(1, 2), scaled_duration=40.0,
                 base=RunConfig())
rows = cli.run_matrix(spec, out / "sweep", jobs=1)
print(f"{len(rows)} runs written to {out / 'sweep'}")
print((out / "sweep" / "summary.csv").read_text())

cli.emit_analytic_curves([1.0, 10.0], CurveSpec(r_min=20.0, r_max=200.0, samples=10),
                         out / "curves.csv")
print((out / "curves.csv").read_text())
