"""
Report writing: one CSV per table plus a plain-text rendering.
"""
import json
import logging
import os
from typing import Dict, Union

import pandas as pd

TEXT_REPORT = 'report.txt'

logger = logging.getLogger(__name__)


def _frames(report) -> Dict[str, pd.DataFrame]:
    if isinstance(report, pd.DataFrame):
        return {'report': report}
    if isinstance(report, dict):
        return report
    return report.frames()


def render_text(report, float_format: str = '{:.6g}') -> str:
    """Tables of a report as aligned plain text."""
    sections = []
    for name, frame in _frames(report).items():
        body = frame.to_string(index=False, float_format=float_format.format) if not frame.empty else '(empty)'
        sections.append(f"== {name} ==\n{body}")
    parameters = getattr(report, 'parameters', None)
    if parameters:
        sections.append(f"== parameters ==\n{json.dumps(parameters, indent=2, sort_keys=True, default=str)}")
    return '\n\n'.join(sections) + '\n'


def write_report(report: Union[pd.DataFrame, Dict[str, pd.DataFrame], object], directory: str) -> Dict[str, str]:
    """
    Write every table of a report as ``<name>.csv`` plus ``report.txt``.

    Args:
        report: EvaluationReport, SensitivityReport, dict of frames or a single frame
        directory: Output directory (created if missing)

    Returns:
        Dict: Table name to written path
    """
    os.makedirs(directory, exist_ok=True)
    written = {}
    for name, frame in _frames(report).items():
        path = os.path.join(directory, f"{name}.csv")
        frame.to_csv(path, index=False)
        written[name] = path
    text_path = os.path.join(directory, TEXT_REPORT)
    with open(text_path, 'w', encoding='utf-8') as f:
        f.write(render_text(report))
    written['text'] = text_path
    logger.info(f"Wrote {len(written) - 1} report tables to {directory}")
    return written
