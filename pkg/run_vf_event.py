#!/usr/bin/env python3
"""
vf_event 主執行腳本

few-shot 視覺融合事件偵測的入口點：
驗證資料、訓練、合成圖片、推論與 K-shot 實驗網格
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

# 添加專案路徑
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from src.main.python.cli import (
    COMMANDS,
    cmd_eval,
    cmd_imagine,
    cmd_infer,
    cmd_make_toy,
    cmd_train,
    cmd_validate,
)
from src.main.python.core import RunConfig, VFEventError, load_run_config, setup_logging


def _list_literal(values) -> str:
    return "[" + ", ".join(str(v) for v in values) + "]"


def flag_overrides(args: argparse.Namespace) -> List[str]:
    """把專用旗標轉成 section.field=value 覆寫（在 --override 之後套用）"""
    overrides = list(args.override or [])
    if args.dataset:
        overrides.append(f"data.dataset_path={args.dataset}")
    if args.out:
        overrides.append(f"output_dir={args.out}")
    if args.seed is not None:
        overrides.append(f"train.seed={args.seed}")
        if not args.seeds:
            overrides.append(f"eval.seeds=[{args.seed}]")
    if args.seeds:
        overrides.append(f"eval.seeds={_list_literal(args.seeds)}")
    if args.shots:
        overrides.append(f"eval.shots={_list_literal(args.shots)}")
        overrides.append(f"train.k_shots={args.shots[0]}")
    if args.mode:
        overrides.append(f"eval.modes={_list_literal(args.mode)}")
    return overrides


class VFEventArgumentParser(argparse.ArgumentParser):
    """用法錯誤屬於使用者錯誤，結束碼 1"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = VFEventArgumentParser(
        description="vf_event: few-shot 視覺融合事件偵測",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
使用範例:
  python run_vf_event.py make-toy --preset joint_feature --out data/toy           # 生成玩具資料集
  python run_vf_event.py validate --dataset data/toy/manifest.jsonl               # 驗證資料清單
  python run_vf_event.py train --config configs/toy.yaml --out runs/toy           # 訓練並寫出 checkpoint
  python run_vf_event.py imagine --checkpoint runs/toy/model.vfe --text "meeting" # 合成圖片
  python run_vf_event.py infer --checkpoint runs/toy/model.vfe --mode imagine     # 批次推論
  python run_vf_event.py eval --config configs/toy.yaml --shots 5 10 --mode textonly imagine retrieve
        """
    )
    parser.add_argument("command", choices=COMMANDS, help="子命令")
    parser.add_argument("--config", "-c", help="YAML 設定檔路徑")
    parser.add_argument("--override", "-o", action="append", metavar="KEY=VALUE",
                        help="覆寫設定值，例如 train.beta=0.1（可重複）")
    parser.add_argument("--dataset", help="JSONL 資料清單（覆寫 data.dataset_path）")
    parser.add_argument("--out", help="輸出目錄（覆寫 output_dir）")
    parser.add_argument("--seed", type=int, help="全域亂數種子")
    parser.add_argument("--seeds", type=int, nargs="+", help="eval 使用的種子列表")
    parser.add_argument("--shots", type=int, nargs="+", help="K-shot 列表")
    parser.add_argument("--mode", nargs="+", help="視覺情境模式")
    parser.add_argument("--checkpoint", help="checkpoint 路徑（imagine / infer / eval）")
    parser.add_argument("--text", help="imagine 的查詢文字")
    parser.add_argument("--png", help="imagine 輸出的 PNG 路徑")
    parser.add_argument("--preset", default="joint_feature", help="make-toy 的資料集樣式")
    parser.add_argument("--per-class", type=int, default=40, help="make-toy 每類筆數")
    return parser


def dispatch(args: argparse.Namespace, config: RunConfig) -> int:
    if args.command == "validate":
        return cmd_validate(config)
    if args.command == "train":
        return cmd_train(config)
    if args.command == "imagine":
        return cmd_imagine(config, args.checkpoint, args.text, args.png)
    if args.command == "infer":
        return cmd_infer(config, args.checkpoint, args.mode[0] if args.mode else None)
    if args.command == "eval":
        return cmd_eval(config, args.checkpoint)
    return cmd_make_toy(config, args.preset, args.per_class)


def main(argv: Optional[List[str]] = None) -> int:
    """主函數，回傳結束碼"""
    args = build_parser().parse_args(argv)
    load_dotenv()
    logger = logging.getLogger("main")

    try:
        config = load_run_config(args.config, flag_overrides(args))
        setup_logging(config.logging)
        return dispatch(args, config)
    except VFEventError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"❌ {type(e).__name__}: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        print("\n⚠️  使用者中斷執行")
        return 1
    except Exception as e:
        logger.error(f"Unexpected failure: {e}", exc_info=True)
        print(f"❌ 執行失敗: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
