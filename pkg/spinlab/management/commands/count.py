import math

from spinlab.cli import SpinLabCommand, model_system
from spinlab.counting import McmcParams, annealing_partition, telescoping_partition
from spinlab.exact import enumerate_states
from spinlab.exceptions import CapExceededError, UsageError
from spinlab.graphs import NOT_BIPARTITE, bipartite_partition


def _order(text):
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"cannot parse the order {text!r}") from None


class Command(SpinLabCommand):
    help = "Estimate the hardcore partition function by telescoping or annealing"

    def add_command_arguments(self, parser):
        parser.add_argument("--method", choices=("telescope", "anneal"), required=True)
        parser.add_argument(
            "--order",
            help="comma-separated elimination order (default: the left side of a bipartite graph, else all vertices)",
        )
        parser.add_argument("--marginals", choices=("exact", "mcmc"), default="exact")
        parser.add_argument("--schedule-length", dest="schedule_length", type=int)
        parser.add_argument("--lambda0", type=float, help="starting fugacity of the annealing schedule")

    def default_order(self, graph):
        part = bipartite_partition(graph)
        if part is NOT_BIPARTITE:
            return list(range(graph.n))
        return sorted(part.left)

    def run(self, options):
        system, _ = self.system(options)
        if system.name == "coloring":
            raise UsageError("counting is implemented for the hardcore and matching models")
        graph, lam = system.graph, options["lam"]
        results = {**model_system(system), "method": options["method"], "lambda": lam}
        if options["method"] == "telescope":
            order = _order(options["order"]) if options["order"] else self.default_order(graph)
            mcmc = McmcParams(options["steps"], options["burnin"], options["chains"], options["seed"])
            trace = telescoping_partition(graph, lam, order, options["marginals"], mcmc, options["cap"])
            if trace.skipped:
                self.warn(f"skipped already-removed vertices {trace.skipped}")
            results.update(trace=trace, logZ=trace.log_z, logZ_se=trace.log_z_se)
            results["table"] = trace.table()
        else:
            estimate = annealing_partition(
                system,
                lam,
                schedule_length=options["schedule_length"],
                steps_per_level=options["steps"],
                seed=options["seed"],
                chains=options["chains"],
                burnin=options["burnin"],
                lam0=options["lambda0"],
            )
            if estimate.flagged:
                self.warn(f"levels {estimate.flagged} exceed the relative standard error threshold")
            results.update(anneal=estimate, logZ=estimate.log_z, logZ_se=estimate.log_z_se)
            results["table"] = estimate.table()
        try:
            exact = enumerate_states(system, cap=options["cap"]).log_z
        except CapExceededError:
            exact = None
        results["exact_logZ"] = exact
        if exact is not None:
            results["abs_error"] = abs(results["logZ"] - exact)
            results["relative_error_Z"] = abs(math.expm1(results["logZ"] - exact))
        return results
