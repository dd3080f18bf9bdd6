from .experiment import D2RLoop, ExperimentSpec, build_loop, replay_events, run_experiment

__all__ = ["D2RLoop", "ExperimentSpec", "build_loop", "replay_events", "run_experiment"]
