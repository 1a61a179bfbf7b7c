"""Run the check suite on a scenario and read the report.

A scenario whose twist is broken (its top order removed) fails the cocycle
check; everything that depends on the twist is then skipped, not failed.
"""
import sys

from twistcalc.scenario import bundled_scenario, load_scenario
from twistcalc.verify import run_suite

name = sys.argv[1] if len(sys.argv) > 1 else "moyal_faulty.scn"
report = run_suite(load_scenario(bundled_scenario(name)), jobs=1)

counts = {}
for r in report.results:
    counts[r.status] = counts.get(r.status, 0) + 1
print(name, counts)

for r in report.results:
    if r.status == "fail":
        print(f"  {r.id} fails first at h^{r.first_failing_order}: {r.sample}")
skipped = [r for r in report.results if r.status == "skip"]
if skipped:
    print(f"  e.g. {skipped[0].id} skipped: {skipped[0].detail}")
print("overall:", "ok" if report.ok else "failures present")
