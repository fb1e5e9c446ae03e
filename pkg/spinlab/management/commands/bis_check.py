from spinlab.cli import SpinLabCommand
from spinlab.counting import McmcParams, bis_condition_check, fptas_reduction
from spinlab.exceptions import UsageError
from spinlab.graphs import NOT_BIPARTITE, BipartitePartition, bipartite_partition


class Command(SpinLabCommand):
    help = "Check the #BIS degree condition delta_R >= 2^Delta_L and optionally run the reduction"

    def add_command_arguments(self, parser):
        parser.add_argument("--left", help="comma-separated left side (default: BFS 2-colouring)")
        parser.add_argument("--swap", action="store_true", help="exchange the two sides")
        parser.add_argument(
            "--reduce", action="store_true", help="also estimate log Z by telescoping over the left side"
        )
        parser.add_argument("--marginals", choices=("exact", "mcmc"), default="exact")

    def partition(self, graph, options):
        if options["left"]:
            try:
                left = frozenset(int(tok) for tok in options["left"].split(",") if tok.strip())
            except ValueError:
                raise UsageError(f"cannot parse the left side {options['left']!r}") from None
            part = BipartitePartition(left=left, right=frozenset(range(graph.n)) - left)
        else:
            part = bipartite_partition(graph)
            if part is NOT_BIPARTITE:
                raise UsageError("the graph is not bipartite")
        return part.swapped() if options["swap"] else part

    def run(self, options):
        graph = self.graph(options)
        part = self.partition(graph, options)
        report = bis_condition_check(graph, part)
        results = {"n": graph.n, "edges": graph.m, "left": part.left, "right": part.right, "check": report}
        if options["reduce"]:
            mcmc = McmcParams(options["steps"], options["burnin"], options["chains"], options["seed"])
            trace = fptas_reduction(graph, part, options["lam"], options["marginals"], mcmc, options["cap"])
            results.update(trace=trace, logZ=trace.log_z)
            results["table"] = trace.table()
        else:
            results["table"] = [
                {"vertex": v, "side": side, "degree": d}
                for side, degrees in (("L", report.left_degrees), ("R", report.right_degrees))
                for v, d in degrees.items()
            ]
        return results
