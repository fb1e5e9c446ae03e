import math

from spinlab.bounds import NOT_EVALUABLE, alo_gap_bound, alo_gap_bound_ch, main_gap_bound
from spinlab.cli import SpinLabCommand, model_system
from spinlab.exceptions import UsageError
from spinlab.graphs import max_degree
from spinlab.spectral import glauber_spectrum, si_profile, tensorization_constant
from spinlab.systems import parse_pinning

# slack when comparing an exact gap with a lower bound
BOUND_SLACK = 1e-9


class Command(SpinLabCommand):
    help = "Exact Glauber spectral gap with the spectral-independence lower bounds"

    def add_command_arguments(self, parser):
        parser.add_argument("--pin", default="", help="pinning as vertex:spin,vertex:spin")
        parser.add_argument("--si-mode", choices=("exhaustive", "sampled"), help="pinning sweep mode")
        parser.add_argument(
            "--tensorization",
            action="store_true",
            help="also report the approximate-tensorization constant and its random search",
        )
        parser.add_argument("--trials", type=int, default=1000, help="random functions for the search")

    def run(self, options):
        system, _ = self.system(options)
        n = system.n
        spectrum = glauber_spectrum(system, parse_pinning(options["pin"]), options["cap"])
        if spectrum.reducible:
            self.warn("the Glauber chain is reducible on this instance")
        profile = si_profile(system, options["si_mode"], seed=options["seed"], cap=options["cap"])
        results = {**model_system(system), "spectrum": spectrum, "gap": spectrum.gap, "si": profile}
        try:
            alo = alo_gap_bound(profile.etas)
            results["alo_gap_bound"] = alo
            results["alo_holds"] = spectrum.gap >= alo - BOUND_SLACK
        except UsageError as exc:
            results["alo_gap_bound"] = NOT_EVALUABLE
            results["alo_note"] = str(exc)
        c, eta = profile.fitted_C, profile.fitted_eta
        if eta < 1:
            results["alo_gap_bound_CH"] = alo_gap_bound_ch(n, c, eta)
            results["main_gap_bound"] = main_gap_bound(n, max_degree(system.graph), c, eta)
        else:
            results["alo_gap_bound_CH"] = results["main_gap_bound"] = NOT_EVALUABLE
        if options["tensorization"]:
            report = tensorization_constant(system, options["trials"], options["seed"], options["cap"])
            results["tensorization"] = report
            if report.searched is not None and math.isfinite(report.constant):
                results["tensorization"] = {
                    **report.to_dict(),
                    "relative_difference": abs(report.searched - report.constant) / report.constant,
                }
        results["table"] = [{"index": i, "eigenvalue": x} for i, x in enumerate(spectrum.eigenvalues)]
        return results
