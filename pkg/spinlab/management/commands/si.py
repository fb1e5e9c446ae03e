import math

from spinlab.bounds import (
    coloring_si_constants,
    hardcore_si_constants,
    local_expansion_profile,
    matching_si_constants,
)
from spinlab.cli import SpinLabCommand, model_system
from spinlab.graphs import max_degree
from spinlab.spectral import local_spectral_profile, si_profile

BOUND_SLACK = 1e-9


class Command(SpinLabCommand):
    help = "Spectral-independence profile eta_0..eta_{n-2} with the model's theory constants"

    def add_command_arguments(self, parser):
        parser.add_argument("--mode", choices=("exhaustive", "sampled"), help="pinning sweep mode")
        parser.add_argument("--samples", type=int, help="pinnings drawn in sampled mode")
        parser.add_argument(
            "--local", action="store_true", help="compare local-walk eigenvalues with scaled influences"
        )

    def run(self, options):
        graph = self.graph(options)
        system, _ = self.system(options, graph)
        n = system.n
        profile = si_profile(system, options["mode"], options["samples"], options["seed"], options["cap"])
        if profile.mode == "sampled":
            self.warn("sampled mode: eta_k are lower estimates")
        delta = max_degree(graph)
        results = {**model_system(system), "si": profile, "Delta": delta}
        etas = profile.etas
        if system.name == "hardcore":
            constants = hardcore_si_constants(options["lam"], delta)
            results["theory"] = constants
            results["theory_holds"] = all(
                e <= constants["eta"] * (n - k - 1) + BOUND_SLACK
                for k, e in enumerate(etas)
                if not math.isnan(e)
            )
        elif system.name == "matching":
            constants = matching_si_constants(delta, options["lam"])
            results["theory"] = constants
            results["theory_holds"] = all(e <= constants["C"] + BOUND_SLACK for e in etas if not math.isnan(e))
        else:
            results["theory"] = coloring_si_constants()
        if profile.fitted_eta < 1:
            zetas, alphas = local_expansion_profile(n, profile.fitted_C, profile.fitted_eta)
            results["local_expansion"] = {"zeta_i": zetas, "alpha_i": alphas}
        if options["local"]:
            results["local_walk"] = local_spectral_profile(
                system, options["mode"], options["samples"], options["seed"], options["cap"]
            )
        results["table"] = profile.table()
        return results
