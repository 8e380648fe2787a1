# symlift/config.py
import os
import logging
from dotenv import load_dotenv

from symlift.errors import GuardExceededError

# 環境変数の読み込み
load_dotenv()

logger = logging.getLogger(__name__)

# ログ設定
LOG_LEVEL = os.getenv("SYMLIFT_LOG_LEVEL", "INFO").upper()

# 机上スケールのガード値（SYMLIFT_GUARD_OVERRIDE で解除）
EXTENSION_LIMIT = int(os.getenv("SYMLIFT_EXTENSION_LIMIT", "64"))
SUPPORT_MAX_N = int(os.getenv("SYMLIFT_SUPPORT_MAX_N", "6"))
MANAGEABLE_MAX_N = int(os.getenv("SYMLIFT_MANAGEABLE_MAX_N", "4"))
MANAGEABLE_MAX_K = int(os.getenv("SYMLIFT_MANAGEABLE_MAX_K", "3"))
VERTEX_MAX_VARS = int(os.getenv("SYMLIFT_VERTEX_MAX_VARS", "8"))
VERTEX_MAX_CONSTRAINTS = int(os.getenv("SYMLIFT_VERTEX_MAX_CONSTRAINTS", "40"))

# 並列検証のデフォルトジョブ数
DEFAULT_JOBS = int(os.getenv("SYMLIFT_JOBS", str(os.cpu_count() or 1)))


def guards_lifted() -> bool:
    # テストから monkeypatch できるよう毎回読む
    return os.getenv("SYMLIFT_GUARD_OVERRIDE", "").strip().lower() in ("1", "true", "yes", "on")


def guard(name: str, value: int, limit: int) -> None:
    """value が limit を超えたら GuardExceededError（オーバーライド時は警告のみ）"""
    if value <= limit:
        return
    if guards_lifted():
        logger.warning(f"guard {name} exceeded ({value} > {limit}), continuing because SYMLIFT_GUARD_OVERRIDE is set")
        return
    raise GuardExceededError(f"{name} = {value} exceeds the desk-scale limit {limit} (set SYMLIFT_GUARD_OVERRIDE=1 to lift it)")
