#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
SAGE 时间序列异常检测 - 主入口文件
SAGE Time-Series Anomaly Detection - Main Entry Point

项目结构：
- sage/         工具、分析器、检测器、监督者、评估
- conf/         示例配置
- data/sample/  内置小数据集 (sin / step / noise)
- app.py        主入口文件

示例 / Examples:
    python app.py detect data/sample --out exp/sample
    python app.py eval exp/sample/records.jsonl data/sample
"""

import sys

from sage.bin.sage_main import main

BANNER = """
    ╔═══════════════════════════════════════════════════╗
    ║   SAGE - 时间序列异常检测与诊断                    ║
    ║   subcommands: detect | build-icl | gen-synth     ║
    ║                eval | report                      ║
    ╚═══════════════════════════════════════════════════╝
"""

if __name__ == "__main__":
    if len(sys.argv) == 1:
        print(BANNER)
        sys.argv.append('--help')
    sys.exit(main())
