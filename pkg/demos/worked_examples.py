"""Classify the two four- and six-item instances and print their census."""
from pathlib import Path

from binpack_games.enumeration import census, prices
from binpack_games.equilibria import classify
from binpack_games.model import load_instance, load_packing

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"

for name in ("j1", "j2"):
    inst = load_instance(DATA / f"{name}.json")
    pack = load_packing(DATA / f"{name}_packing.json")
    r = classify(pack, inst)
    print(f"{name}: sizes {[str(s) for s in inst.sizes]}")
    print(f"  packing {pack.bins}: NE={r.is_ne.value} SNE={r.is_sne.value} WPO={r.is_wpo.value} SPO={r.is_spo.value}")
    c = census(inst)
    print(f"  census {c.to_dict()}")
    print(f"  prices {prices(inst, census_result=c).to_dict()}")
