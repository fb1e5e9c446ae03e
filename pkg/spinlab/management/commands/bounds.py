from spinlab import bounds
from spinlab.cli import SpinLabCommand
from spinlab.exceptions import UsageError

FORMULAS = (
    "alo",
    "alo_ch",
    "main",
    "mixing_estimate",
    "local",
    "kappa",
    "block",
    "at_chain",
    "tail",
    "lambda_c",
    "alpha_star",
    "mixing",
    "regime",
)


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"cannot parse the list {text!r}") from None


class Command(SpinLabCommand):
    help = "Evaluate one closed-form bound from its parameters"

    defaults: dict = {}

    def add_command_arguments(self, parser):
        parser.add_argument("--formula", choices=FORMULAS, required=True)
        parser.add_argument("--n", type=int)
        parser.add_argument("--delta-cap", dest="max_degree", type=int, help="maximum degree Delta")
        parser.add_argument("--delta", dest="slack", type=float, help="slack delta of the regime conditions")
        parser.add_argument("--C", dest="c", type=float)
        parser.add_argument("--eta", type=float)
        parser.add_argument("--etas", help="comma-separated eta_0..eta_{n-2}")
        parser.add_argument("--theta", type=float)
        parser.add_argument("--ell", type=int)
        parser.add_argument("--r", type=int)
        parser.add_argument("--s", type=int)
        parser.add_argument("--q", type=int)
        parser.add_argument("--c-ell", dest="c_ell", type=float)
        parser.add_argument("--kmax", type=int, default=1, help="component size for the tail bound")
        parser.add_argument("--tau-rel", dest="tau_rel", type=float)
        parser.add_argument("--eps", type=float)
        parser.add_argument("--min-mu", dest="min_mu", type=float)
        parser.add_argument("--warm-ratio", dest="warm_ratio", type=float)
        parser.add_argument("--kind", choices=("coloring", "hardcore", "matching"))

    def need(self, options, *names):
        missing = [name for name in names if options.get(name) is None]
        if missing:
            flags = ", ".join(f"--{name.replace('_', '-')}" for name in missing)
            raise UsageError(f"formula {options['formula']} needs {flags}")
        return [options[name] for name in names]

    def run(self, options):
        formula = options["formula"]
        value = self.evaluate(formula, options)
        return {"formula": formula, "value": value}

    def evaluate(self, formula, options):
        def need(*names):
            return self.need(options, *names)

        if formula == "alo":
            return {"alo_gap_bound": bounds.alo_gap_bound(_floats(need("etas")[0]))}
        if formula == "alo_ch":
            return {"alo_gap_bound_CH": bounds.alo_gap_bound_ch(*need("n", "c", "eta"))}
        if formula == "main":
            return bounds.main_gap_bound(*need("n", "max_degree", "c", "eta"))
        if formula == "mixing_estimate":
            return {"t_mix_order": bounds.alo_mixing_estimate(*need("n", "c", "eta", "q"))}
        if formula == "local":
            zetas, alphas = bounds.local_expansion_profile(*need("n", "c", "eta"))
            return {"zeta_i": zetas, "alpha_i": alphas}
        if formula == "kappa":
            n, r, s, c, eta = need("n", "r", "s", "c", "eta")
            return {"kappa": bounds.kappa_rs(n, r, s, c, eta)}
        if formula == "block":
            if options.get("theta") is not None:
                return bounds.block_factorization_report(*need("n", "theta", "c", "eta"))
            n, ell, c, eta = need("n", "ell", "c", "eta")
            return {"ell": ell, "C_ell": bounds.block_factorization_constant(n, ell, c, eta)}
        if formula == "at_chain":
            c_ell, c, eta, delta, theta, ell = need("c_ell", "c", "eta", "max_degree", "theta", "ell")
            return {"bound": bounds.at_chain_bound(c_ell, c, eta, delta, theta, ell), "constant_status": "nominal"}
        if formula == "tail":
            n, delta, theta = need("n", "max_degree", "theta")
            return {"k": options["kmax"], "bound": bounds.component_tail_bound(n, delta, theta, options["kmax"])}
        if formula == "lambda_c":
            return {"lambda_c": bounds.lambda_critical(*need("max_degree"))}
        if formula == "alpha_star":
            return {"alpha_star": bounds.alpha_star()}
        if formula == "mixing":
            tau_rel, eps = need("tau_rel", "eps")
            return bounds.mixing_relations(tau_rel, eps, options.get("min_mu"), options.get("warm_ratio"))
        kind = need("kind")[0]
        params = {
            "delta": options.get("max_degree"),
            "delta_slack": options.get("slack"),
            "k": options.get("k"),
            "n": options.get("n"),
            "lambda": options.get("lam"),
        }
        return bounds.regime_checks(kind, params)
