#!/usr/bin/env python3
"""Golden prompt fixtures, built independently of the C++ templates.

The prompt wording below is transcribed by hand from the published prompt
listings. Blocks are separated by one blank line, lines inside a block by a
newline, and history lines are joined with newlines right after
"previous rounds: ". Trailing spaces are dropped.

Usage: make_golden.py [--check] [outdir]
"""
import json
import sys
from pathlib import Path

FEATURES = {
    "fair": "payoff maximization, strategic thinking, fairness concern",
    "selfish": "payoff maximization, strategic thinking, selfishness",
}

SYSTEM = ("You are playing a multi-round game. You will be given instructions of the game. "
          "Important: Please pretend that you are a human in the game with the following features "
          "when making decisions: {features}")

TOTAL_ROUNDS = 5


def money(cents):
    if cents % 100 == 0:
        return str(cents // 100)
    return "%d.%02d" % (cents // 100, cents % 100)


def cents(text):
    whole, _, frac = text.partition(".")
    frac = (frac + "00")[:2]
    return int(whole) * 100 + int(frac)


def ug_payoffs(offer_cents, response):
    if response == "accept":
        return 10000 - offer_cents, offer_cents
    return 0, 0


PD_PAYOFF = {
    ("cooperate", "cooperate"): (200, 200),
    ("cooperate", "defect"): (0, 300),
    ("defect", "cooperate"): (300, 0),
    ("defect", "defect"): (100, 100),
}


def footer_common(round_no, features):
    return [
        "This is round %d of the game with %d round(s) left." % (round_no, TOTAL_ROUNDS - round_no),
        "Important: Please pretend that you are a human in the game with the following features when making the decision: " + features,
        "Please answer in the exact format.",
    ]


JSON_LINES = [
    'Please provide your answer in this round in a single-line JSON format with two keys: "reasoning" and "decision"',
    '{"reasoning": "...", "decision": "..."}',
    'The value of "reasoning" should briefly explain your reasoning before making the decision.',
]


def proposer_prompt(history, features):
    round_no = len(history) + 1
    blocks = [[
        "Game Instructions:",
        "In this game, you are the proposer (described below).",
        "Your goal is to maximize your total payoff over 5 rounds.",
        "As the proposer, in each round, your task is to divide a sum of 100 dollars between yourself and another player.",
        "Subsequently, another player (a responder) will then either accept or reject your proposal.",
        "If they accept, then the money will be divided according to your proposal. If they reject, you two will earn nothing.",
        "You will be given the choices and payoffs of both players in past rounds.",
        "Your total payoff in this game will be the cumulative sum of the payoffs you obtain over 5 rounds.",
    ]]
    if round_no == 1:
        blocks.append(["Now let us begin the game!", "Recall that you are the proposer."])
    else:
        mine = theirs = 0
        lines = []
        for k, (offer, response) in enumerate(history, start=1):
            p, r = ug_payoffs(offer, response)
            mine += p
            theirs += r
            lines.append("Round %d summary: You keep %s dollars yourself and offer %s dollars to the responder; "
                         "Decision by the responder: %s" % (k, money(10000 - offer), money(offer), response))
        blocks.append([
            "Recall that you are the proposer.",
            "You have played %d round(s) before." % (round_no - 1),
            "Here is the history of the gameplay of previous rounds: " + "\n".join(lines) + ".",
            "Your total payoff so far: %s dollars;" % money(mine),
            "The other player's total payoff so far: %s dollars." % money(theirs),
        ])
    blocks.append(JSON_LINES + [
        "The value of \"decision\" should have the following format: 'I keep [] dollars to myself and offer [] dollars to the other player.'",
        "Replace [] with your choices.",
        "Subsequently, a responder will then either accept or reject your proposal.",
        "If they accept, then the money will be divided according to your proposal.",
        "If they reject, you two will earn nothing.",
    ] + footer_common(round_no, features))
    return "\n\n".join("\n".join(b) for b in blocks)


def responder_prompt(history, offer, features):
    round_no = len(history) + 1
    blocks = [[
        "Game Instructions:",
        "In this game, you are the responder (described below).",
        "Your goal is to maximize your total payoff over 5 rounds.",
        "In each round, another player (a proposer) will first propose how to divide a sum of 100 dollars between themselves and you.",
        "As the responder, your task is to either accept or reject that proposal.",
        "If you accept, then the money will be divided according to the proposal.",
        "If you reject, you two will earn nothing.",
        "You will be given the choices and payoffs of both players in past rounds.",
        "Your total payoff in this game will be the cumulative sum of the payoffs you obtain over 5 rounds.",
    ]]
    if round_no == 1:
        blocks.append(["Now let us begin the game!", "Recall that you are the responder."])
    else:
        mine = theirs = 0
        lines = []
        for k, (o, response) in enumerate(history, start=1):
            p, r = ug_payoffs(o, response)
            mine += r
            theirs += p
            lines.append("Round %d summary: The proposer keeps %s dollars himself and offers %s dollars to you; "
                         "Decision by you: %s" % (k, money(10000 - o), money(o), response))
        blocks.append([
            "Recall that you are the responder.",
            "You have played %d round(s) before." % (round_no - 1),
            "Here is the history of the gameplay of previous rounds: " + "\n".join(lines),
            "Your total payoff so far: %s dollars;" % money(mine),
            "The other player's total payoff so far: %s dollars" % money(theirs),
        ])
    blocks.append([
        "Proposer's offer:",
        "In this round, the proposer proposes to offer you %s dollars while keeping the remaining %s dollars to themselves."
        % (money(offer), money(10000 - offer)),
        "Do you accept or reject the above offer?",
    ])
    blocks.append(JSON_LINES + [
        'The value of "decision" should be just one word: either accept or reject.',
        "If you accept, then the money will be divided according to the proposal.",
        "If you reject, you two will earn nothing.",
    ] + footer_common(round_no, features))
    return "\n\n".join("\n".join(b) for b in blocks)


def pd_prompt(history, player, features):
    round_no = len(history) + 1
    blocks = [
        [
            "Game Instructions:",
            "In this game, you are the player %d (described below)." % player,
            "Your goal is to maximize your total payoff over 5 rounds.",
            "In each round, you can select one of the two choices: cooperate or defect.",
            "The other player will also select cooperate or defect, and the payoffs you get in each round will depend on both of your choices.",
        ],
        [
            "Payoff is determined as follows:",
            "1. If both of you cooperate, then both of you get 200 dollars",
            "2. If one player cooperates and the other player defects, then the cooperating player gets 0 dollars and the defecting player gets 300 dollars",
            "3. If both of you defect, then both of you get 100 dollars",
        ],
        [
            "Please carefully read the above payoff determination rule and remember it.",
            "Note that in each round, you and the other player make choices simultaneously.",
            "You will be given the choices and payoffs of both players in past rounds.",
            "Your total payoff in this game will be the cumulative sum of the payoffs you obtain over 5 rounds.",
        ],
    ]
    if round_no == 1:
        blocks.append(["Now let us begin the game!", "Recall that you are the player %d." % player])
    else:
        mine = theirs = 0
        lines = []
        for k, (a, b) in enumerate(history, start=1):
            pa, pb = PD_PAYOFF[(a, b)]
            own, other = (a, b) if player == 1 else (b, a)
            own_pay, other_pay = (pa, pb) if player == 1 else (pb, pa)
            mine += own_pay
            theirs += other_pay
            lines.append("Round %d summary: You choose to %s and the other player chooses to %s. "
                         "You get %d dollars and the other player gets %d dollars" % (k, own, other, own_pay, other_pay))
        blocks.append([
            "Recall that you are the player %d." % player,
            "You have played %d round(s) before." % (round_no - 1),
            "Here is the history of the gameplay of previous rounds: " + "\n".join(lines) + ";",
            "Your total payoff so far: %d dollars;" % mine,
            "The other player's total payoff so far: %d dollars." % theirs,
        ])
    blocks.append(JSON_LINES + [
        'The value of "decision" should be either "cooperate" or "defect".',
    ] + footer_common(round_no, features))
    return "\n\n".join("\n".join(b) for b in blocks)


TRAIT = {"F": "fair", "S": "selfish"}

# Offers in cents with the responder's reply, one list per scenario.
UG_HISTORIES = {
    "declining": [(4000, "accept"), (3500, "accept"), (3000, "reject"), (3500, "accept")],
    "fractional": [(3350, "accept"), (2575, "reject"), (5000, "accept"), (0, "accept")],
}
UG_PENDING = [4500, 3000, 3250, 3500, 2500]

PD_HISTORIES = {
    "mixed": [("cooperate", "cooperate"), ("cooperate", "defect"), ("defect", "cooperate"), ("defect", "defect")],
    "allc": [("cooperate", "cooperate")] * 4,
}


def cases():
    out = []
    for code in ["SS", "SF", "FS", "FF"]:
        for hist_name, hist in UG_HISTORIES.items():
            for round_no in ([1, 3, 5] if hist_name == "declining" else [2, 4]):
                history = hist[: round_no - 1]
                for seat in "AB":
                    trait = TRAIT[code[0] if seat == "A" else code[1]]
                    pending = UG_PENDING[round_no - 1] if seat == "B" else None
                    if seat == "A":
                        user = proposer_prompt(history, FEATURES[trait])
                    else:
                        user = responder_prompt(history, pending, FEATURES[trait])
                    out.append({
                        "id": "ug-%s-%s-r%d-%s" % (code, hist_name, round_no, seat),
                        "game": "ultimatum", "treatment": code, "seat": seat,
                        "history": [{"offer": money(o), "response": r} for o, r in history],
                        "pending_offer": money(pending) if pending is not None else None,
                        "system": SYSTEM.format(features=FEATURES[trait]), "user": user,
                    })
    for code in ["SS", "SF", "FF"]:
        for hist_name, hist in PD_HISTORIES.items():
            for round_no in ([1, 2, 5] if hist_name == "mixed" else [3]):
                history = hist[: round_no - 1]
                for seat in "AB":
                    trait = TRAIT[code[0] if seat == "A" else code[1]]
                    player = 1 if seat == "A" else 2
                    out.append({
                        "id": "pd-%s-%s-r%d-%s" % (code, hist_name, round_no, seat),
                        "game": "prisoners_dilemma", "treatment": code, "seat": seat,
                        "history": [{"a": a, "b": b} for a, b in history],
                        "pending_offer": None,
                        "system": SYSTEM.format(features=FEATURES[trait]),
                        "user": pd_prompt(history, player, FEATURES[trait]),
                    })
    return out


def main(argv):
    check = "--check" in argv
    args = [a for a in argv if a != "--check"]
    outdir = Path(args[0]) if args else Path(__file__).resolve().parent
    case_dir = outdir / "cases"
    manifest = []
    mismatches = []
    for c in cases():
        files = {"system": "cases/%s.system.txt" % c["id"], "user": "cases/%s.user.txt" % c["id"]}
        for part, rel in files.items():
            path = outdir / rel
            if check:
                if not path.exists() or path.read_text() != c[part]:
                    mismatches.append(rel)
            else:
                case_dir.mkdir(parents=True, exist_ok=True)
                path.write_text(c[part])
        entry = {k: v for k, v in c.items() if k not in ("system", "user")}
        entry.update(files)
        manifest.append(entry)
    text = json.dumps({"total_rounds": TOTAL_ROUNDS, "cases": manifest}, indent=1) + "\n"
    if check:
        if (outdir / "manifest.json").read_text() != text:
            mismatches.append("manifest.json")
        if mismatches:
            print("stale golden files: " + ", ".join(mismatches))
            return 1
        print("%d golden cases up to date" % len(manifest))
        return 0
    (outdir / "manifest.json").write_text(text)
    print("wrote %d golden cases" % len(manifest))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
