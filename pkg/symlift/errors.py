# symlift/errors.py


class SymliftError(Exception):
    """ドメインエラーの基底クラス。CLI では JSON エラーオブジェクト + exit_code に変換される"""

    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


# ====== 数値・LP関連（Start） ======
class RationalParseError(SymliftError):
    pass

class LPValidationError(SymliftError):
    pass

class UnknownVariableError(SymliftError):
    pass

class SchemaError(SymliftError):
    pass
# ====== 数値・LP関連（End） ======


# ====== 回路・コンパイル関連（Start） ======
class CircuitError(SymliftError):
    pass

class GadgetError(SymliftError):
    pass

class CompileError(SymliftError):
    pass
# ====== 回路・コンパイル関連（End） ======


# ====== ソルバー関連（Start） ======
class InfeasibleError(SymliftError):
    pass

class UnboundedPolytopeError(SymliftError):
    pass

class SolverError(SymliftError):
    pass
# ====== ソルバー関連（End） ======


# ====== 対称性関連（Start） ======
class NotSymmetricError(SymliftError):
    pass

class AuxMapError(SymliftError):
    pass

class NonRigidError(SymliftError):
    pass

class SupportTooLargeError(SymliftError):
    pass

class ManageableShapeError(SymliftError):
    pass
# ====== 対称性関連（End） ======


class GuardExceededError(SymliftError):
    pass
