from spinlab.cli import SpinLabCommand
from spinlab.graphs import GENERATOR_KINDS, generate, girth, max_degree, serialize_graph


class Command(SpinLabCommand):
    help = "Generate a graph and write it as an edge-list file (to --out or standard output)"

    emits_report = False
    defaults = {"seed": 0}

    def add_command_arguments(self, parser):
        parser.add_argument("--kind", choices=GENERATOR_KINDS, required=True)
        for name in ("n", "a", "b", "rows", "cols", "m"):
            parser.add_argument(f"--{name}", type=int, help=f"generator parameter {name}")
        parser.add_argument("--d", type=float, help="degree (random_regular) or average degree (gnp)")

    def run(self, options):
        params = {
            name: options[name]
            for name in ("n", "d", "a", "b", "rows", "cols", "m")
            if options.get(name) is not None
        }
        graph = generate(options["kind"], params, options["seed"])
        text = serialize_graph(graph)
        if options.get("out"):
            options["out"].write_text(text, encoding="utf-8")
        else:
            self.stdout.write(text, ending="")
        summary = {
            "kind": options["kind"],
            "n": graph.n,
            "edges": graph.m,
            "Delta": max_degree(graph),
            "girth": girth(graph),
        }
        self.info(f"{options['kind']}: n={graph.n}, m={graph.m}", options)
        return summary
