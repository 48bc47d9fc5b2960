"""Regenerate the golden scripted-backend fixtures under fixtures/."""

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def decomposition(easy: str, intermediate: str, final: str) -> str:
    return (
        f"Decomposition [Easy]\nDescription: {easy}\n\n"
        f"Decomposition [Intermediate]\nDescription: {intermediate}\n\n"
        f"Decomposition [Final]\nDescription: {final}\n"
    )


def generation(tier: str, description: str, thoughts: list[str]) -> str:
    lines = [f"Decomposition [{tier}]", f"Description: {description}", ""]
    lines += [f"Thought {i}: {text}" for i, text in enumerate(thoughts, start=1)]
    return "\n".join(lines) + "\n"


def scoring(rows: list[tuple[int, int, int, int]], final_answer: str = "") -> str:
    lines = ["Scores:"]
    for i, (lv, coh, sim, adp) in enumerate(rows, start=1):
        total = lv + coh + sim + adp
        lines.append(f"- Thought {i}: LV: {lv}, COH: {coh}, SIM: {sim}, "
                     f"ADP: {adp}, Total: {total}")
    text = "\n".join(lines) + "\n"
    if final_answer:
        text += f"\nFinal Answer: {final_answer}\n"
    return text


LASTLETTER = {
    "task": {
        "id": "lastletter-appendix",
        "statement": ("Take the last letter of each word in the sentence: "
                      "'Artificial intelligence is the future' and concatenate "
                      "them to form a new string."),
        "instructions": "",
        "gold_answer": "lesee",
        "source": "lastletter",
    },
    "plan": {
        "easy": "Extract the last letter of each word in the sentence.",
        "intermediate": "Combine the extracted letters into a single string.",
        "final": "Verify the final output and ensure all steps have been completed correctly.",
    },
    "thoughts": {
        "easy": [
            'Identify the words in the sentence: "Artificial", "intelligence", "is", "the", "future".',
            'Extract the last letter of each word: "l", "e", "s", "e", "e".',
            "Check if each word is correctly identified and its last letter is accurately extracted.",
        ],
        "intermediate": [
            'Concatenate the letters to form the string "lesee".',
            "Verify if the concatenated string represents the order of the words in the original sentence.",
            "Check for any errors in the concatenation process.",
        ],
        "final": [
            'Review the concatenated string "lesee" to ensure it matches the task requirements.',
            "Validate that the process of extracting last letters and concatenating them followed the proper sequence.",
            "Finalize the result as the correct output for the given task.",
        ],
    },
    "scores": {
        "easy": [(10, 9, 10, 10), (9, 8, 8, 9), (5, 5, 5, 5)],
        "intermediate": [(10, 9, 9, 10), (8, 7, 8, 8), (4, 5, 4, 5)],
        "final": [(10, 10, 9, 10), (7, 7, 7, 7), (4, 4, 4, 4)],
    },
    "final_answer_line": 'The final concatenated string is "lesee".',
    "expected": {
        "final_answer": 'The final concatenated string is "lesee".',
        "normalized_answer": "lesee",
        "totals": {"easy": [39, 34, 20], "intermediate": [38, 31, 18],
                   "final": [39, 28, 16]},
        "selected": {"easy": [1, 2], "intermediate": [1, 2], "final": [1]},
        "rejected": {"easy": [3], "intermediate": [3], "final": [2, 3]},
        "kpm_blocks": {
            "easy": ["Selected Thoughts (Easy): Thought 1, Thought 2",
                     "Rejected Thoughts (Easy): Thought 3"],
            "intermediate": ["Selected Thoughts (Intermediate): Thought 1, Thought 2",
                             "Rejected Thoughts (Intermediate): Thought 3"],
            "final": ["Selected Thoughts (Final): Thought 1",
                      "Rejected Thoughts (Final): Thought 2, Thought 3"],
        },
    },
}

GSM8K = {
    "task": {
        "id": "gsm8k-appendix",
        "statement": ("Toula went to the bakery and bought various types of pastries. "
                      "She bought 3 dozen donuts which cost $68 per dozen, 2 dozen "
                      "mini cupcakes which cost $80 per dozen, and 6 dozen mini "
                      "cheesecakes for $55 per dozen. How much was the total cost?"),
        "instructions": "",
        "gold_answer": "694",
        "source": "gsm8k",
    },
    "plan": {
        "easy": ("Break down the task by identifying each type of pastry and "
                 "calculating the total cost for each one individually."),
        "intermediate": "Calculate the cost for each pastry and find the sum of all the items.",
        "final": "Calculate the total cost by adding up the costs from the previous steps.",
    },
    "thoughts": {
        "easy": [
            "Identify the total cost of the donuts by multiplying 3 dozen by $68 per dozen.",
            "Identify the total cost of the mini cupcakes by multiplying 2 dozen by $80 per dozen.",
            "Identify the total cost of the mini cheesecakes by multiplying 6 dozen by $55 per dozen.",
        ],
        "intermediate": [
            "The total cost of the donuts is 3 × 68 = $204.",
            "The total cost of the mini cupcakes is 2 × 80 = $160.",
            "The total cost of the mini cheesecakes is 6 × 55 = $330.",
        ],
        "final": [
            ("Add the total cost of the donuts, mini cupcakes, and mini cheesecakes "
             "to get the final total: 204 + 160 + 330."),
            "Verify that the calculation for each item was done correctly.",
            "Double-check the total to make sure there were no mistakes in the addition.",
        ],
    },
    "scores": {
        "easy": [(10, 9, 10, 10), (9, 9, 9, 9), (6, 6, 6, 7)],
        "intermediate": [(10, 10, 9, 10), (9, 9, 9, 9), (6, 7, 7, 7)],
        "final": [(10, 10, 10, 10), (9, 9, 9, 9), (7, 7, 7, 7)],
    },
    "final_answer_line": "The total cost is $694.",
    "expected": {
        "final_answer": "The total cost is $694.",
        "normalized_answer": "694",
        "totals": {"easy": [39, 36, 25], "intermediate": [39, 36, 27],
                   "final": [40, 36, 28]},
        "selected": {"easy": [1, 2], "intermediate": [1, 2], "final": [1, 2]},
        "rejected": {"easy": [3], "intermediate": [3], "final": [3]},
        "kpm_blocks": {
            "easy": ["Selected Thoughts (Easy): Thought 1, Thought 2",
                     "Rejected Thoughts (Easy): Thought 3"],
            "intermediate": ["Selected Thoughts (Intermediate): Thought 1, Thought 2",
                             "Rejected Thoughts (Intermediate): Thought 3"],
            "final": ["Selected Thoughts (Final): Thought 1, Thought 2",
                      "Rejected Thoughts (Final): Thought 3"],
        },
    },
}

MMLU = {
    "task": {
        "id": "mmlu-appendix",
        "statement": ("Let p = (1, 2, 5, 4)(2, 3) in S_5. Find the index of <p> "
                      "in S_5. Choices: ['8', '2', '24', '120']"),
        "instructions": "",
        "gold_answer": "2",
        "source": "mmlu",
    },
    "plan": {
        "easy": ("Break down the task by identifying and analyzing the given "
                 "permutation structure in S_5."),
        "intermediate": ("Analyze the structure of the group <p> and its "
                         "implications for the index in S_5."),
        "final": "Use all previous knowledge to determine the correct index of <p> in S_5.",
    },
    "thoughts": {
        "easy": [
            ("Recognize that p is a product of disjoint cycles, where (1, 2, 5, 4) "
             "is a 4-cycle and (2, 3) is a 2-cycle."),
            ("Identify that the order of a permutation is the least common multiple "
             "(LCM) of the lengths of the disjoint cycles."),
            "Calculate the order of p using the LCM of 4 and 2.",
        ],
        "intermediate": [
            ("The subgroup <p> is generated by p, and the order of p is the least "
             "common multiple (LCM) of 4 and 2, which is 4."),
            "Calculate the index of <p> in S_5 as 120 / 4 = 30 (incorrect thought).",
            ("Recognize that the correct formula for the index of a cyclic subgroup "
             "in a symmetric group is 120 / 4 = 30."),
        ],
        "final": [
            ("The order of S_5 is 120, and the order of p is 4, so the index of <p> "
             "in S_5 is 30."),
            "Verify if the solution aligns with the structure of S_5 and correct subgroup orders.",
            ("Conclude that the index of <p> in S_5 is 2 based on the correct "
             "analysis of p's structure."),
        ],
    },
    "scores": {
        "easy": [(10, 10, 10, 9), (9, 9, 9, 8), (6, 7, 7, 6)],
        "intermediate": [(10, 10, 9, 9), (5, 6, 5, 5), (9, 9, 9, 9)],
        "final": [(7, 8, 7, 7), (9, 9, 9, 9), (10, 10, 9, 10)],
    },
    "final_answer_line": "The index of <p> in S_5 is 2.",
    "expected": {
        "final_answer": "The index of <p> in S_5 is 2.",
        "normalized_answer": "2",
        "totals": {"easy": [39, 35, 26], "intermediate": [38, 21, 36],
                   "final": [29, 36, 39]},
        "selected": {"easy": [1, 2], "intermediate": [1, 3], "final": [2, 3]},
        "rejected": {"easy": [3], "intermediate": [2], "final": [1]},
        "kpm_blocks": {
            "easy": ["Selected Thoughts (Easy): Thought 1, Thought 2",
                     "Rejected Thoughts (Easy): Thought 3"],
            "intermediate": ["Selected Thoughts (Intermediate): Thought 1, Thought 3",
                             "Rejected Thoughts (Intermediate): Thought 2"],
            "final": ["Selected Thoughts (Final): Thought 2, Thought 3",
                      "Rejected Thoughts (Final): Thought 1"],
        },
    },
}


def build_fixture(spec: dict) -> dict:
    plan = spec["plan"]
    responses = [decomposition(plan["easy"], plan["intermediate"], plan["final"])]
    for tier in ("easy", "intermediate", "final"):
        responses.append(generation(tier.capitalize(), plan[tier], spec["thoughts"][tier]))
        final_line = spec["final_answer_line"] if tier == "final" else ""
        responses.append(scoring(spec["scores"][tier], final_line))
    return {
        "task": spec["task"],
        "responses": responses,
        "expected": spec["expected"],
    }


def main() -> None:
    out_dir = ROOT / "fixtures"
    out_dir.mkdir(exist_ok=True)
    for name, spec in (("lastletter", LASTLETTER), ("gsm8k", GSM8K), ("mmlu", MMLU)):
        path = out_dir / f"{name}.json"
        path.write_text(json.dumps(build_fixture(spec), indent=2, ensure_ascii=False) + "\n",
                        encoding="utf-8")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
