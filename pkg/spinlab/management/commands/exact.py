from spinlab.cli import SpinLabCommand, model_system
from spinlab.exact import enumerate_states
from spinlab.systems import parse_pinning


class Command(SpinLabCommand):
    help = "Enumerate a small spin system exactly: log Z, marginals and optionally every state"

    def add_command_arguments(self, parser):
        parser.add_argument("--pin", default="", help="pinning as vertex:spin,vertex:spin")
        parser.add_argument(
            "--states", action="store_true", help="tabulate every feasible state with its probability"
        )

    def run(self, options):
        system, edge_map = self.system(options)
        pinning = parse_pinning(options["pin"])
        space = enumerate_states(system, cap=options["cap"]).condition(pinning)
        marginals = space.marginals()
        results = {
            **model_system(system),
            "pinning": pinning,
            "logZ": space.log_z,
            "Z": space.z,
            "state_count": space.size,
            "marginals": marginals,
        }
        if edge_map is not None:
            results["edge_map"] = edge_map
        if options["states"]:
            results["table"] = [
                {"state": " ".join(str(c) for c in row), "probability": p}
                for row, p in zip(space.states.tolist(), space.probabilities.tolist())
            ]
        else:
            results["table"] = [
                {"vertex": v, **{f"spin_{c}": float(marginals[v, c]) for c in range(system.q)}}
                for v in range(system.n)
            ]
        return results
