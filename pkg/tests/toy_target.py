"""Three-branch toy target: entry, starts with "a", ends with "b"."""
from instrumentation import TargetFault, hit


def process(text: str) -> None:
    hit(0)
    if text.startswith("a"):
        hit(1)
    if text.endswith("b"):
        hit(2)
    if text == "cb":
        raise TargetFault("ToyFault")
