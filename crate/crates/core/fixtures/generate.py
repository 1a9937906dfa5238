"""Regenerates the bundled synthetic fixtures.

Output is deterministic. Run from this directory:

    python3 generate.py
"""

import json
import random

# ---------------------------------------------------------------- intent

INTENTS = [
    "Information Request",
    "Action Directive",
    "Expression of Concern",
    "Feedback Provision",
    "General Inquiry",
]

TOPICS = [
    "order", "invoice", "report", "budget", "release", "contract", "schedule",
    "shipment", "migration", "audit", "proposal", "dashboard", "onboarding",
    "roadmap", "vendor", "deployment", "survey", "training", "forecast", "backlog",
]

WHEN = ["by Friday", "before noon", "today", "this week", "by end of day", "tomorrow morning"]

CLEAR = {
    "Information Request": [
        "Could you send me the details on the {t}?",
        "What is the current status of the {t}?",
        "Where can I find the documentation for the {t}?",
        "Can someone share the latest numbers for the {t}?",
        "Which team owns the {t} right now?",
        "When is the {t} expected to be finalized?",
        "I need the latest figures on the {t}.",
        "I would like some background on the {t}.",
        "Can you share more on the {t} process?",
        "Is there any information on the {t} yet?",
    ],
    "Action Directive": [
        "Please update the {t} {w}.",
        "Schedule a review of the {t} {w}.",
        "Submit the {t} to finance {w}.",
        "Make sure the {t} gets approved {w}.",
        "Assign someone to close out the {t} {w}.",
        "Send the revised {t} to the client {w}.",
    ],
    "Expression of Concern": [
        "I am worried about delays in the {t}.",
        "There is a serious problem with the {t}.",
        "The {t} keeps failing and it is frustrating.",
        "I'm concerned the {t} will miss the deadline.",
        "This {t} situation is getting risky.",
        "I'm uneasy about how the {t} is being handled.",
    ],
    "Feedback Provision": [
        "Great job on the {t}, it looks excellent.",
        "The new {t} works really well, thanks.",
        "I liked the way the {t} was presented.",
        "Nice improvement on the {t} since last time.",
        "The {t} was clear and well organized, kudos.",
        "Really impressed with the quality of the {t}.",
    ],
    "General Inquiry": [
        "Just curious, is anyone going to the team lunch?",
        "Anyone up for coffee this afternoon?",
        "How is everyone doing today?",
        "Does the office open early on Monday?",
        "Is the parking garage closed for the holiday?",
        "Random question, who picked the music in the lobby?",
    ],
}

# Hard texts mix signals: the writer's intent is carried by a short cue,
# wrapped with a clause borrowed from another intent's everyday wording.
# Bag-of-words evidence is split; phrasing and the writer's habits are not.
FRAMES = [
    "{d}, but {c}.",
    "{c}, even though {d}.",
    "Regarding the {t} process: {d}, and {c}.",
]

DISTRACTORS = {
    "Information Request": [
        "I saw the status of the {t}",
        "the details on the {t} are shared",
        "the {t} documentation is online",
    ],
    "Action Directive": [
        "the {t} was updated {w}",
        "finance got the {t} {w}",
        "the {t} review is scheduled {w}",
    ],
    "Expression of Concern": [
        "the {t} had a problem last month",
        "delays in the {t} were frustrating",
        "the {t} deadline was risky",
    ],
    "Feedback Provision": [
        "thanks for the {t} update",
        "the {t} looks excellent overall",
        "the {t} works really well",
    ],
    "General Inquiry": [
        "hope everyone is doing well today",
        "the team lunch was fun",
        "coffee this afternoon sounds good",
    ],
}

CUES = {
    "Information Request": [
        "I need to know the timeline",
        "can you tell me how it works",
        "what are the next steps",
        "is there a summary somewhere",
        "I would like to know who approved it",
        "any pointers on where the files live",
        "could you explain the timeline",
        "I want to know the current owner",
        "please clarify what changed",
        "where do we find the latest version",
    ],
    "Action Directive": [
        "please get it done {w}",
        "make it happen {w}",
        "have it signed off {w}",
        "loop in legal and finish it {w}",
        "escalate it to the director {w}",
        "book the room and run it {w}",
        "please finish the handover {w}",
        "make sure legal reviews it {w}",
        "I need the numbers {w}",
        "file the paperwork {w}",
    ],
    "Expression of Concern": [
        "I am worried it will slip",
        "this looks like a problem",
        "I fear we are falling behind",
        "it seems off track and nobody is responding",
        "numbers look alarming lately",
        "I am concerned nobody owns it",
        "I am afraid the client will walk away",
        "this issue keeps coming back",
        "I need to raise a worry about the budget",
        "it feels like we are falling apart",
    ],
    "Feedback Provision": [
        "great work on it",
        "it went really well",
        "nicely done everyone",
        "smooth and efficient this time",
        "the team handled it brilliantly",
        "top notch effort",
        "great job pulling it together",
        "kudos to the whole crew",
        "really impressed by the turnaround",
        "I need to say the demo went great",
    ],
    "General Inquiry": [
        "just curious how everyone feels",
        "anyone else notice the new coffee machine",
        "random thought, does anyone know a good lunch spot",
        "out of curiosity, who is organizing the party",
        "by the way, is the gym open late",
        "side question, what time is the town hall",
        "just curious, is the parking garage full",
        "anyone up for a walk later",
        "random question, who waters the plants",
        "by the way, is there cake in the kitchen",
    ],
}

N_USERS = 20
DOCS_PER_USER = 10
DOMINANT_SHARE = 0.8
HARD_SHARE = 0.45


def intent_corpus(rng):
    rows = []
    for u in range(N_USERS):
        dominant = INTENTS[u % len(INTENTS)]
        for k in range(DOCS_PER_USER):
            if rng.random() < DOMINANT_SHARE:
                label = dominant
            else:
                label = rng.choice([i for i in INTENTS if i != dominant])
            if rng.random() < HARD_SHARE:
                other = rng.choice([i for i in INTENTS if i != label])
                t, w = rng.choice(TOPICS), rng.choice(WHEN)
                cue = rng.choice(CUES[label]).format(w=w)
                distractor = rng.choice(DISTRACTORS[other]).format(t=t, w=w)
                text = rng.choice(FRAMES).format(t=t, c=cue, d=distractor)
                text = text[0].upper() + text[1:]
            else:
                text = rng.choice(CLEAR[label]).format(t=rng.choice(TOPICS), w=rng.choice(WHEN))
            rows.append({"user_id": f"user-{u:02d}", "label": label, "text": text})
    rng.shuffle(rows)
    return [
        {"id": f"intent-{i:03d}", "text": r["text"], "label": r["label"], "user_id": r["user_id"]}
        for i, r in enumerate(rows)
    ]


def intent_rules():
    ir, ad, ec, fp, gi = INTENTS
    specs = [
        ("ir-more-info-order", r"(?i)more information.*order", ir, 0.80),
        ("ir-more-info", r"(?i)\bmore (information|details)\b", ir, 0.75),
        ("ir-tell-me", r"(?i)\b(tell|show) me\b", ir, 0.75),
        ("ir-next-steps", r"(?i)\bnext steps\b", ir, 0.70),
        ("ir-like-to-know", r"(?i)\b(like|want) to know\b", ir, 0.80),
        ("ir-where-find", r"(?i)\bwhere (can|do) (i|we) find\b", ir, 0.85),
        ("ir-status", r"(?i)\bstatus of\b", ir, 0.80),
        ("ir-send-details", r"(?i)\bsend me\b", ir, 0.75),
        ("ir-summary", r"(?i)\bsummary\b", ir, 0.65),
        ("ir-when-expected", r"(?i)^when is\b", ir, 0.75),
        ("ad-please-verb", r"(?i)\bplease (update|get|send|submit|schedule|finish)\b", ad, 0.80),
        ("ad-deadline", r"(?i)\b(by friday|by end of day|before noon|tomorrow morning)\b", ad, 0.70),
        ("ad-make-sure", r"(?i)\bmake (sure|it happen)\b", ad, 0.75),
        ("ad-signed-off", r"(?i)\bsigned off\b", ad, 0.80),
        ("ad-escalate", r"(?i)\bescalate\b", ad, 0.70),
        ("ad-imperative-start", r"^(Schedule|Submit|Assign|Send|Book)\b", ad, 0.80),
        ("ad-loop-in", r"(?i)\bloop in\b", ad, 0.75),
        ("ec-worried", r"(?i)\b(worried|concerned|uneasy)\b", ec, 0.85),
        ("ec-problem", r"(?i)\b(problem|issue)\b", ec, 0.70),
        ("ec-fear", r"(?i)\b(fear|afraid)\b", ec, 0.80),
        ("ec-behind", r"(?i)\b(falling behind|off track|slip)\b", ec, 0.80),
        ("ec-alarming", r"(?i)\b(alarming|risky|frustrating)\b", ec, 0.80),
        ("ec-deadline-miss", r"(?i)\bmiss the deadline\b", ec, 0.85),
        ("fp-great", r"(?i)\bgreat (job|work)\b", fp, 0.85),
        ("fp-well", r"(?i)\b(went|works) really well\b", fp, 0.80),
        ("fp-nicely", r"(?i)\bnice(ly)? (done|improvement)\b", fp, 0.80),
        ("fp-kudos", r"(?i)\b(kudos|thanks|impressed)\b", fp, 0.70),
        ("fp-brilliant", r"(?i)\b(brilliant(ly)?|excellent|top notch)\b", fp, 0.80),
        ("fp-smooth", r"(?i)\bsmooth\b", fp, 0.70),
        ("gi-curious", r"(?i)\b(just curious|out of curiosity)\b", gi, 0.85),
        ("gi-anyone", r"(?i)^anyone\b|\banyone (else|up for)\b", gi, 0.75),
        ("gi-random", r"(?i)\b(random|side) (question|thought)\b", gi, 0.80),
        ("gi-by-the-way", r"(?i)\bby the way\b", gi, 0.75),
        ("gi-lunch-coffee", r"(?i)\b(lunch|coffee|party|gym)\b", gi, 0.65),
        ("gi-how-everyone", r"(?i)\bhow (is|does) everyone\b", gi, 0.80),
    ]
    return {"rules": [{"id": i, "pattern": p, "label": l, "confidence": c} for i, p, l, c in specs]}


# ------------------------------------------------------------------ spam

SPAM = [
    "WINNER! You have been selected for a {p} prize. Call {n} now to claim.",
    "URGENT: your account has a pending {p} reward, reply YES to receive it.",
    "Free entry to win a {p}! Text WIN to {n}. T&Cs apply.",
    "Congratulations, you won a guaranteed {p}. Claim at {u} before midnight.",
    "Cheap loans approved instantly, no credit check. Visit {u}.",
    "You are due a {p} refund. Click {u} to collect your cash.",
    "Limited offer: get a {p} for just 1 pound. Reply STOP to opt out.",
    "Hot singles in your area want to meet you. Text DATE to {n}.",
    "Your mobile number won {p} in our weekly draw, call {n}.",
    "Act now! Exclusive {p} deal expires today, visit {u}.",
]

HAM = [
    "Hey, are we still on for {a} later?",
    "Can you pick up some {g} on the way home?",
    "Running late, see you at {a} in ten minutes.",
    "Thanks for yesterday, it was really fun.",
    "Did you finish the {g} shopping or should I go?",
    "Ok lar, I'll call you when I get to {a}.",
    "Mum says dinner is at seven, don't be late.",
    "I left my keys at {a}, can you check?",
    "Good luck with the exam tomorrow!",
    "Happy birthday! Hope you have a great day.",
    "What time does the {a} start tonight?",
    "Sorry I missed your call, was in a meeting.",
]

PRIZES = ["cash", "holiday", "phone", "voucher", "car", "iPad", "cruise", "gift card"]
NUMBERS = ["08001234567", "09061701461", "87121", "81010", "0800 555 0199"]
URLS = ["www.win-now.biz", "http://claim-prize.co", "www.freecash.info", "bit.ly/claim"]
PLACES = ["the gym", "lunch", "the cinema", "the station", "the pub", "practice", "work"]
GROCERIES = ["milk", "bread", "eggs", "coffee", "fruit", "rice"]


def spam_corpus(rng):
    rows = []
    for i in range(500):
        if rng.random() < 0.35:
            text = rng.choice(SPAM).format(p=rng.choice(PRIZES), n=rng.choice(NUMBERS), u=rng.choice(URLS))
            label = "spam"
        else:
            text = rng.choice(HAM).format(a=rng.choice(PLACES), g=rng.choice(GROCERIES))
            label = "ham"
        rows.append({"id": f"sms-{i:03d}", "text": text, "label": label})
    return rows


def spam_rules():
    specs = [
        ("spam-claim", r"(?i)\bclaim\b", "spam", 0.90),
        ("spam-winner", r"(?i)\b(winner|won|win)\b", "spam", 0.85),
        ("spam-url", r"(?i)(www\.|https?://|bit\.ly)", "spam", 0.90),
        ("spam-shortcode", r"\b\d{5}\b", "spam", 0.75),
        ("spam-free", r"(?i)\bfree (entry|cash)\b", "spam", 0.90),
        ("spam-stop", r"(?i)reply (stop|yes)", "spam", 0.85),
        ("ham-see-you", r"(?i)\bsee you\b", "ham", 0.80),
        ("ham-home", r"(?i)\b(home|dinner|mum)\b", "ham", 0.75),
    ]
    return {"rules": [{"id": i, "pattern": p, "label": l, "confidence": c} for i, p, l, c in specs]}


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def write_json(path, value):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(value, f, indent=2, ensure_ascii=False)
        f.write("\n")


if __name__ == "__main__":
    write_jsonl("intent.jsonl", intent_corpus(random.Random(20240601)))
    write_json("intent_rules.json", intent_rules())
    write_jsonl("spam.jsonl", spam_corpus(random.Random(5574)))
    write_json("spam_rules.json", spam_rules())
