"""Reproducibility records for solver runs."""

import json
import time
from dataclasses import asdict, dataclass, field


@dataclass
class RunManifest:
    """Configuration, iterate history and outcome of one solver run."""

    config: dict
    options: dict
    iterations: int = 0
    objective_history: list = field(default_factory=list)
    grad_norm_history: list = field(default_factory=list)
    reg_history: list = field(default_factory=list)
    final_value: float = float("nan")
    wall_time: float = 0.0
    termination_reason: str = "unknown"
    extra: dict = field(default_factory=dict)

    def record(self, value, grad_norm, reg):
        if self.objective_history and value > self.objective_history[-1] + 1e-12:
            raise AssertionError("objective history must be non-increasing")
        self.objective_history.append(float(value))
        self.grad_norm_history.append(float(grad_norm))
        self.reg_history.append(float(reg))
        self.iterations = len(self.objective_history)

    def to_json(self, indent=2):
        return json.dumps(asdict(self), indent=indent, default=float)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @staticmethod
    def load(path):
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return RunManifest(**data)

    def history_csv(self):
        lines = ["iter,value,proj_grad_norm,lambda"]
        for i, (v, g, r) in enumerate(zip(self.objective_history,
                                          self.grad_norm_history,
                                          self.reg_history)):
            lines.append(f"{i},{v:.17g},{g:.17g},{r:.17g}")
        return "\n".join(lines) + "\n"


class Stopwatch:
    def __init__(self):
        self.t0 = time.perf_counter()

    def elapsed(self):
        return time.perf_counter() - self.t0
