import numpy as np

from spinlab.bounds import NOT_EVALUABLE, kappa_rs
from spinlab.cli import SpinLabCommand, model_system
from spinlab.exact import enumerate_states
from spinlab.spectral import down_up_matrix, glauber_matrix, si_profile, variance_contraction_check

BOUND_SLACK = 1e-9


class Command(SpinLabCommand):
    help = "Exact s <-> r down-up walk gap against the contraction bound kappa_{r,s}"

    def add_command_arguments(self, parser):
        parser.add_argument("--s", dest="s_level", type=int, required=True, help="upper level")
        parser.add_argument("--r", dest="r_level", type=int, required=True, help="lower level")
        parser.add_argument(
            "--contraction",
            type=int,
            default=0,
            metavar="TRIALS",
            help="check the variance contraction on this many random functions",
        )

    def run(self, options):
        system, _ = self.system(options)
        s, r = options["s_level"], options["r_level"]
        walk = down_up_matrix(system, s, r, options["cap"])
        gap = walk.spectrum.gap
        results = {
            **model_system(system),
            "s": s,
            "r": r,
            "level_size": len(walk.masses),
            "spectrum": walk.spectrum,
            "gap": gap,
        }
        profile = si_profile(system, seed=options["seed"], cap=options["cap"])
        results["C"], results["eta"] = profile.fitted_C, profile.fitted_eta
        if s >= 1 and profile.fitted_eta < 1:
            kappa = kappa_rs(system.n, r, s, profile.fitted_C, profile.fitted_eta)
            results["kappa"] = kappa
            results["kappa_holds"] = gap >= kappa - BOUND_SLACK
        else:
            results["kappa"] = NOT_EVALUABLE
        if s == system.n and r == system.n - 1:
            glauber = glauber_matrix(system, cap=options["cap"])
            results["glauber_difference"] = float(np.abs(walk.kernel - glauber).max())
        trials = options["contraction"]
        if trials:
            rng = np.random.default_rng(options["seed"])
            size = enumerate_states(system, cap=options["cap"]).size
            ratios = [
                variance_contraction_check(system, s, r, rng.random(size), options["cap"])
                for _ in range(trials)
            ]
            results["contraction"] = {
                "max_ratio": max(ratios),
                "one_minus_gap": 1 - gap,
                "holds": max(ratios) <= 1 - gap + BOUND_SLACK,
            }
        results["table"] = [{"index": i, "eigenvalue": x} for i, x in enumerate(walk.spectrum.eigenvalues)]
        return results
