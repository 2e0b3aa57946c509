import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
PROGRAMS = ROOT / "programs"


def program_path(name: str) -> pathlib.Path:
    return PROGRAMS / f"{name}.sl"


def load_program(name: str) -> str:
    return program_path(name).read_text(encoding="utf-8")


def load_expect(name: str) -> dict:
    return json.loads((PROGRAMS / f"{name}.expect.json").read_text(encoding="utf-8"))


def corpus_names() -> list[str]:
    return sorted(p.stem for p in PROGRAMS.glob("*.sl"))
