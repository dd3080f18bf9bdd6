from .scenario import load_scenario, load_scenario_file
from .simulator import Simulator

__all__ = ["load_scenario", "load_scenario_file", "Simulator"]
