import numpy as np

from spinlab.cli import SpinLabCommand, model_system
from spinlab.exact import enumerate_states
from spinlab.exceptions import CapExceededError
from spinlab.glauber import InitialState, jackknife_standard_error, run_chain
from spinlab.systems import parse_configuration, parse_pinning


class Command(SpinLabCommand):
    help = "Run Glauber chains and compare spin frequencies with exact marginals when enumerable"

    def add_command_arguments(self, parser):
        parser.add_argument(
            "--init",
            default="greedy",
            help="'greedy', 'warm' (exact sample) or an explicit configuration like 0,1,0",
        )
        parser.add_argument("--pin", default="", help="pinning as vertex:spin,vertex:spin")
        parser.add_argument("--thin", type=int, default=0, help="keep every THIN-th state as a sample")

    def initial(self, options, n):
        init = options["init"]
        if init == "greedy":
            return InitialState.GREEDY_FEASIBLE
        if init == "warm":
            return InitialState.WARM_START
        return parse_configuration(init, n)

    def run(self, options):
        system, _ = self.system(options)
        pinning = parse_pinning(options["pin"])
        init = self.initial(options, system.n)
        summaries = [
            run_chain(
                system,
                init,
                options["steps"],
                options["seed"],
                pinning,
                burnin=options["burnin"],
                thin=options["thin"],
                chain=chain,
            )
            for chain in range(options["chains"])
        ]
        self.info(f"ran {len(summaries)} chains of {options['steps']} steps", options)
        frequencies = np.stack([s.frequencies for s in summaries])
        estimate = frequencies.mean(axis=0)
        errors = np.array(
            [[jackknife_standard_error(frequencies[:, v, c]) for c in range(system.q)] for v in range(system.n)]
        )
        try:
            exact = enumerate_states(system, cap=options["cap"]).condition(pinning).marginals()
        except CapExceededError:
            exact = None
        results = {
            **model_system(system),
            "pinning": pinning,
            "chains": [s.to_dict() for s in summaries],
            "frequencies": estimate,
            "standard_errors": errors,
            "exact_marginals": exact,
        }
        table = []
        for v in range(system.n):
            for c in range(system.q):
                row = {"vertex": v, "spin": c, "estimate": float(estimate[v, c]), "standard_error": float(errors[v, c])}
                if exact is not None:
                    row["exact"] = float(exact[v, c])
                table.append(row)
        if exact is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                z = np.abs(estimate - exact) / errors
            finite = z[np.isfinite(z)]
            results["max_z_score"] = float(finite.max()) if finite.size else None
        results["table"] = table
        return results
