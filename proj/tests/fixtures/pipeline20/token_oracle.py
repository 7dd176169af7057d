#!/usr/bin/env python3
"""Expected token counts for fixture items that reach the token guard.

Renders the training sequence literally and counts words with the `regex`
module: a word is a run of \\w joined by inner apostrophes. Tokens are
ceil(1.3 * words). Writes expected_tokens.json.
"""
import json
import math
import pathlib

import regex

from make_fixture import HERE, ITEMS

SYSTEM = ("You're a helpful Arabic assistant that answers multiple-choice questions accurately. "
          "Choose the best answer based only on the given question and options.")
WORD = regex.compile(r"\w+(?:['’]\w+)*")


def render(question, options, letter):
    body = "\n".join([question] + [f"{l}. {o}" for l, o in zip("ABCD", options)])
    return f"<bos> {SYSTEM} <start_of_turn>user\n{body}\n<end_of_turn>\n<start_of_turn>model\n{letter} <end_of_turn>"


def tokens(s):
    return math.ceil(len(WORD.findall(s)) * 13 / 10)


def main():
    expected = {}
    for n, (q, a, _url, _c, assess, distractors) in enumerate(ITEMS, start=1):
        verdict = json.loads(assess[-1])
        if verdict["answer_evaluation"] == "Incorrect" or verdict["culture_relevance"] == "No":
            continue
        answer = verdict["corrected_answer"] or a
        reply = distractors[-1]
        ds = list(json.loads(reply[reply.index("{"):reply.rindex("}") + 1]).values())
        # Word count does not depend on option order or on the gold letter.
        expected[f"palm-{n:04d}"] = tokens(render(q, [answer] + ds, "A"))
    (HERE / "expected_tokens.json").write_text(json.dumps(expected, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
