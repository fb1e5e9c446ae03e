import math

import numpy as np

from spinlab.bounds import mixing_relations
from spinlab.cli import SpinLabCommand, model_system
from spinlab.exact import enumerate_states
from spinlab.spectral import glauber_matrix, mixing_time, spectral_gap, tv_decay
from spinlab.systems import parse_configuration


class Command(SpinLabCommand):
    help = "Exact total-variation decay of Glauber dynamics by kernel powering"

    def add_command_arguments(self, parser):
        parser.add_argument("--eps", type=float, default=0.01, help="mixing threshold")
        parser.add_argument("--start", help="start configuration like 0,1,0 (default: worst case only)")
        parser.add_argument("--horizon", type=int, default=1000, help="largest step examined")
        parser.add_argument("--warm-ratio", dest="warm_ratio", type=float, help="density bound of a warm start")

    def run(self, options):
        system, _ = self.system(options)
        space = enumerate_states(system, cap=options["cap"])
        mu = space.probabilities
        P = glauber_matrix(system, cap=options["cap"])
        spectrum = spectral_gap(P, mu)
        eps, horizon = options["eps"], options["horizon"]
        results = {**model_system(system), "spectrum": spectrum, "eps": eps, "min_mu": float(mu.min())}
        t_mix = mixing_time(P, mu, eps, max_steps=horizon)
        results["t_mix"] = t_mix
        steps = horizon
        if math.isfinite(spectrum.relaxation_time):
            relations = mixing_relations(spectrum.relaxation_time, eps, float(mu.min()), options["warm_ratio"])
            results["relations"] = relations
            worst_step = math.ceil(relations.worst_bound)
            steps = min(horizon, max(worst_step, t_mix or 0))
            if worst_step <= steps:
                worst = tv_decay(P, mu, worst_step).tv[-1]
                results["worst_bound_holds"] = worst <= eps
            if t_mix is not None:
                results["lower_bound_consistent"] = t_mix >= relations.lower_bound - 1
        else:
            self.warn("the chain is reducible; mixing relations do not apply")
        decay = tv_decay(P, mu, steps)
        results["tv_worst"] = decay
        table = [{"step": t, "tv_worst": value} for t, value in enumerate(decay.tv)]
        if options["start"]:
            start = space.index_of(parse_configuration(options["start"], system.n))
            from_start = tv_decay(P, mu, steps, start)
            results["tv_start"] = from_start
            results["t_mix_start"] = mixing_time(P, mu, eps, start, horizon)
            for row, value in zip(table, from_start.tv):
                row["tv_start"] = value
        results["table"] = table
        results["stationarity_residual"] = float(np.abs(mu @ P - mu).max())
        return results
