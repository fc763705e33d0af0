"""Tape opcodes shared by the expression compiler and both kernels.

The compiled kernel hard-codes the same numbers; ``tests/test_backend.py``
checks they agree.
"""

OP_CONST = 0
OP_VAR = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_NEG = 6
OP_SIN = 7
OP_COS = 8
OP_EXP = 9
OP_SQRT = 10
OP_POW = 11

OPCODES = {
    "const": OP_CONST, "var": OP_VAR, "add": OP_ADD, "sub": OP_SUB,
    "mul": OP_MUL, "div": OP_DIV, "neg": OP_NEG, "sin": OP_SIN,
    "cos": OP_COS, "exp": OP_EXP, "sqrt": OP_SQRT, "pow": OP_POW,
}


class KernelDomainError(ArithmeticError):
    """Raised by a kernel when an instruction leaves its function domain."""

    def __init__(self, instr, point, reason):
        super().__init__(f"{reason} (instruction {instr}, point {point})")
        self.instr = instr
        self.point = point
        self.reason = reason
