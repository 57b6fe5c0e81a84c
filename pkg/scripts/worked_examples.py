"""Print the closed-form worked examples next to what the engine computes.

    python3 scripts/worked_examples.py [--phi EXPR]
"""

import argparse

from contracalc import connection as cn
from contracalc import scalar
from contracalc import symplectic as sy
from contracalc import volume as vo
from contracalc.scalar import Chart, parse_expr, to_text
from contracalc.tensor import Form, MultiVector, parse_tensor, tensor_text, tensors_agree


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--phi", default="1 + x^2*y", help="nonvanishing coefficient on the plane")
    ap.add_argument("--field", default="x*y*e[1] + (y^2 - x)*e[2]")
    args = ap.parse_args()

    R2 = Chart(("x", "y"))
    phi = parse_expr(args.phi, R2)
    X = parse_tensor(args.field, R2, kind="multivector", grade=1)
    std = vo.VolumeForm.standard(R2)
    Pi = MultiVector(R2, 2, {(0, 1): phi})

    print(f"Pi = ({args.phi}) e[1,2], X = {tensor_text(X)}")
    print("modular vector field  :", tensor_text(vo.modular_vector_field(Pi, std)))
    lam = vo.modular_operator(Pi, std, X)
    print("Lambda X (definition) :", tensor_text(lam))
    alt = vo.modular_operator_bracket(Pi, std, X)
    print("(-1)^a [Xi, X]        :", "agrees" if tensors_agree(lam, alt) else "DIFFERS")

    S = sy.SymplecticStructure.from_omega(Form(R2, 2, {(0, 1): 1 / phi}))
    D = cn.build_2d_canonical(S.pi)
    local = sy.modular_changed_volume(S, D, phi, X)
    print("connection formula    :", "agrees" if tensors_agree(lam, local) else "DIFFERS")

    S = sy.SymplecticStructure.from_omega(Form(R2, 2, {(0, 1): phi}))
    D = cn.build_2d_canonical(S.pi)
    c = sy.curl_local(S, D, X).as_scalar()
    print(f"curl wrt ({args.phi}) dx^dy :", to_text(c, R2))
    print("  matches definition  :", scalar.equal_probabilistic(c, vo.curl(S.liouville, X).as_scalar()))


if __name__ == "__main__":
    main()
