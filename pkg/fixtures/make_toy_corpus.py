"""Regenerate toy_corpus.conllu (deterministic; run from this directory)."""

import random

ADJ_SUBJ = ["big", "small", "old", "young", "hungry"]
ADJ_OBJ = ["fresh", "expensive", "cheap", "red", "new"]
PLURAL = {"child": "children", "man": "men", "woman": "women", "fish": "fish",
          "corn": "corn", "rice": "rice", "bread": "bread", "cheese": "cheese",
          "soup": "soup", "water": "water", "milk": "milk", "coffee": "coffee",
          "juice": "juice", "bus": "buses", "dress": "dresses", "star wars": "star wars",
          "titanic": "titanic", "sheep": "sheep"}

#       lemma    VBZ        VBD       VBN
VERBS = {
    "eat": ("eats", "ate", "eaten",
            ["man", "child", "dog", "cat", "student"],
            ["corn", "bread", "rice", "apple", "cheese", "pizza", "chicken", "fish", "soup"]),
    "drink": ("drinks", "drank", "drunk",
              ["man", "woman", "child", "student", "cow", "cat", "dog"],
              ["water", "milk", "coffee", "juice", "soup"]),
    "play": ("plays", "played", "played",
             ["child", "student", "man"],
             ["piano", "guitar", "violin", "drum", "flute"]),
    "wear": ("wears", "wore", "worn",
             ["woman", "man", "child"],
             ["shirt", "hat", "coat", "dress", "shoe"]),
    "drive": ("drives", "drove", "driven",
              ["driver", "man", "woman"],
              ["car", "truck", "bus"]),
    "watch": ("watches", "watched", "watched",
              ["child", "student", "woman"],
              ["star wars", "titanic"]),
    "ride": ("rides", "rode", "ridden",
             ["child", "farmer", "man"],
             ["horse", "bicycle", "bus"]),
    "buy": ("buys", "bought", "bought",
            ["man", "woman", "farmer"],
            ["car", "bread", "shirt", "guitar", "apple"]),
    "feed": ("feeds", "fed", "fed",
             ["farmer", "woman"],
             ["dog", "cat", "cow", "horse", "chicken", "sheep", "child"]),
    "hire": ("hires", "hired", "hired",
             ["farmer", "man"],
             ["driver", "student", "woman"]),
    "cook": ("cooks", "cooked", "cooked",
             ["woman", "man", "child"],
             ["rice", "soup", "chicken", "fish", "pizza"]),
    "sell": ("sells", "sold", "sold",
             ["farmer", "man", "student"],
             ["corn", "milk", "car", "cheese", "hat"]),
}


class Sent:
    def __init__(self):
        self.toks = []

    def add(self, form, lemma, pos, deprel, head=None):
        self.toks.append([form, lemma, pos, head, deprel])
        return len(self.toks) - 1

    def noun_phrase(self, rng, lemma, adjs, deprel, head, det_p=0.5, adj_p=0.4):
        words = lemma.split()
        plural = rng.random() < 0.3 and len(words) == 1
        form = PLURAL.get(lemma, lemma + "s") if plural else lemma
        pos = "NNS" if plural and form != lemma else "NN"
        mods = []
        if rng.random() < det_p:
            mods.append(("the", "the", "DT", "det"))
        if rng.random() < adj_p:
            a = rng.choice(adjs)
            mods.append((a, a, "JJ", "amod"))
        ids = [self.add(*m) for m in mods]
        if len(words) > 1:
            ids.append(self.add(words[0].title(), words[0], "NNP", "compound"))
            pos = "NNP"
            form = words[1].title()
            lemma = words[1]
        else:
            lemma = words[0]
        noun = self.add(form, lemma, pos, deprel, head)
        for i in ids:
            self.toks[i][3] = noun
        return noun

    def conllu(self, sid):
        lines = [f"# sent_id = {sid}",
                 "# text = " + " ".join(t[0] for t in self.toks)]
        for i, (form, lemma, pos, head, deprel) in enumerate(self.toks, 1):
            h = 0 if head is None else head + 1
            lines.append(f"{i}\t{form}\t{lemma}\t_\t{pos}\t_\t{h}\t{deprel}\t_\t_")
        return "\n".join(lines) + "\n"


def active(rng, verb, subj, obj):
    vbz, vbd, _, _, _ = VERBS[verb]
    s = Sent()
    sn = s.noun_phrase(rng, subj, ADJ_SUBJ, "nsubj", None, adj_p=0.3)
    aux = neg = None
    r = rng.random()
    if r < 0.2:
        aux = s.add("will", "will", "MD", "aux")
        form, pos = verb, "VB"
    elif r < 0.3:
        aux = s.add("does", "do", "VBZ", "aux")
        neg = s.add("not", "not", "RB", "neg")
        form, pos = verb, "VB"
    elif r < 0.65:
        form, pos = vbz, "VBZ"
    else:
        form, pos = vbd, "VBD"
    adv = s.add("often", "often", "RB", "advmod") if rng.random() < 0.2 else None
    v = s.add(form, verb, pos, "root")
    for x in (aux, neg, adv):
        if x is not None:
            s.toks[x][3] = v
    s.toks[sn][3] = v
    s.noun_phrase(rng, obj, ADJ_OBJ, "dobj", v)
    if rng.random() < 0.7:
        s.add(".", ".", ".", "punct", v)
    return s


def passive(rng, verb, subj, obj):
    vbn = VERBS[verb][2]
    s = Sent()
    on = s.noun_phrase(rng, obj, ADJ_OBJ, "nsubjpass", None)
    aux = s.add("is", "be", "VBZ", "auxpass")
    v = s.add(vbn, verb, "VBN", "root")
    s.toks[on][3] = v
    s.toks[aux][3] = v
    by = s.add("by", "by", "IN", "case")
    sn = s.noun_phrase(rng, subj, ADJ_SUBJ, "agent", v, adj_p=0.2)
    s.toks[by][3] = sn
    if rng.random() < 0.7:
        s.add(".", ".", ".", "punct", v)
    return s


def to_infinitive(noun, verb):
    # parser error: "water to drink" labels the noun as the verb's subject
    s = Sent()
    n = s.add(noun, noun, "NN", "nsubj")
    to = s.add("to", "to", "TO", "aux")
    v = s.add(verb, verb, "VB", "root")
    s.toks[n][3] = v
    s.toks[to][3] = v
    return s


def this_time(verb, det):
    s = Sent()
    v = s.add(verb, verb, "VB", "root")
    d = s.add(det, det, "DT", "det")
    t = s.add("time", "time", "NN", "dobj", v)
    s.toks[d][3] = t
    return s


def main(seed=20240601, per_verb=15):
    rng = random.Random(seed)
    sents = []
    for verb in VERBS:
        subjects, objects = VERBS[verb][3], VERBS[verb][4]
        for _ in range(per_verb):
            subj, obj = rng.choice(subjects), rng.choice(objects)
            build = passive if rng.random() < 0.2 else active
            sents.append(build(rng, verb, subj, obj))
    for noun, n in (("water", 8), ("coffee", 3)):
        sents.extend(to_infinitive(noun, "drink") for _ in range(n))
    for det in ("this", "next", "this", "next"):
        sents.append(this_time("play", det))
    rng.shuffle(sents)
    with open("toy_corpus.conllu", "w", encoding="utf-8") as fh:
        for i, s in enumerate(sents, 1):
            fh.write(s.conllu(f"toy-{i:03d}") + "\n")
    print(f"{len(sents)} sentences")


if __name__ == "__main__":
    main()
