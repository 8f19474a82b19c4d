//! Surface strings and formulas for every clause template, plus truth values
//! worked out by hand in a small model.

use std::collections::{BTreeMap, BTreeSet};

use haystack_core::forge::{Connective, Grammar, GrammarConfig, Property, Shape, Statement};
use haystack_core::logic::{semantics, Domain, Formula, GroundAtom, Term};

fn x() -> Term {
    Term::Var(0)
}

fn c(name: &str) -> Term {
    Term::c(name)
}

fn u(pred: &str, t: Term) -> Formula {
    Formula::unary(pred, t)
}

fn b(pred: &str, s: Term, o: Term) -> Formula {
    Formula::binary(pred, s, o)
}

fn not(f: Formula) -> Formula {
    Formula::not(f)
}

fn up(pred: &str, positive: bool) -> Property {
    Property::Unary {
        pred: pred.into(),
        positive,
    }
}

fn bp(pred: &str, object: &str, positive: bool) -> Property {
    Property::Binary {
        pred: pred.into(),
        object: object.into(),
        positive,
    }
}

fn person(subject: &str, property: Property) -> Statement {
    Statement::Person {
        subject: subject.into(),
        property,
    }
}

fn sentence(pred: &str, positive: bool) -> Statement {
    Statement::Sentence {
        pred: pred.into(),
        positive,
    }
}

struct Case {
    shape: Shape,
    english: &'static str,
    formula: Formula,
    /// Truth in the model built by `model()`.
    truth: bool,
}

fn cases() -> Vec<Case> {
    vec![
        Case {
            shape: Shape::Statement(person("walter", up("brave_person", false))),
            english: "Walter is not a brave person",
            formula: not(u("brave_person", c("walter"))),
            truth: true,
        },
        Case {
            shape: Shape::Statement(person("mary", up("rich", true))),
            english: "Mary is rich",
            formula: u("rich", c("mary")),
            truth: true,
        },
        Case {
            shape: Shape::Statement(person("gary", up("rich", false))),
            english: "Gary is not rich",
            formula: not(u("rich", c("gary"))),
            truth: true,
        },
        Case {
            shape: Shape::Statement(person("nina", up("enjoys_mountain_biking", true))),
            english: "Nina enjoys mountain biking",
            formula: u("enjoys_mountain_biking", c("nina")),
            truth: false,
        },
        Case {
            shape: Shape::Statement(person("paul", up("owns_smart_tv", false))),
            english: "Paul does not own a smart tv",
            formula: not(u("owns_smart_tv", c("paul"))),
            truth: false,
        },
        Case {
            shape: Shape::Statement(person("susan", bp("richer_than", "nina", true))),
            english: "Susan is richer than Nina",
            formula: b("richer_than", c("susan"), c("nina")),
            truth: true,
        },
        Case {
            shape: Shape::Statement(person("paul", bp("hates", "mary", false))),
            english: "Paul does not hate Mary",
            formula: not(b("hates", c("paul"), c("mary"))),
            truth: false,
        },
        Case {
            shape: Shape::Statement(person("paul", bp("liked_by", "gary", true))),
            english: "Paul is liked by Gary",
            formula: b("liked_by", c("paul"), c("gary")),
            truth: true,
        },
        Case {
            shape: Shape::Statement(sentence("tower_leans", true)),
            english: "A tower leans significantly",
            formula: Formula::prop("tower_leans"),
            truth: true,
        },
        Case {
            shape: Shape::Statement(sentence("round_tables_outlawed", false)),
            english: "A city has not outlawed the use of round tables",
            formula: not(Formula::prop("round_tables_outlawed")),
            truth: true,
        },
        Case {
            shape: Shape::Mutual {
                a: "mary".into(),
                b: "paul".into(),
                pred: "hates".into(),
            },
            english: "Mary and Paul hate each other",
            formula: Formula::And(vec![
                b("hates", c("mary"), c("paul")),
                b("hates", c("paul"), c("mary")),
            ]),
            truth: true,
        },
        Case {
            shape: Shape::Mutual {
                a: "gary".into(),
                b: "walter".into(),
                pred: "sibling_of".into(),
            },
            english: "Gary and Walter are siblings",
            formula: Formula::And(vec![
                b("sibling_of", c("gary"), c("walter")),
                b("sibling_of", c("walter"), c("gary")),
            ]),
            truth: false,
        },
        Case {
            shape: Shape::Conditional {
                condition: up("night_owl", false),
                consequence: bp("liked_by", "gary", false),
            },
            english: "everyone in the room who is not a night owl is not liked by Gary",
            formula: Formula::forall(Formula::implies(
                not(u("night_owl", x())),
                not(b("liked_by", x(), c("gary"))),
            )),
            truth: false,
        },
        Case {
            shape: Shape::Conditional {
                condition: up("rich", true),
                consequence: up("happy", true),
            },
            english: "everyone in the room who is rich is happy",
            formula: Formula::forall(Formula::implies(u("rich", x()), u("happy", x()))),
            truth: true,
        },
        Case {
            shape: Shape::NotAllConditional {
                condition: up("rich", true),
                consequence: up("happy", true),
            },
            english: "not everyone in the room who is rich is happy",
            formula: not(Formula::forall(Formula::implies(u("rich", x()), u("happy", x())))),
            truth: false,
        },
        Case {
            shape: Shape::Biconditional {
                condition: up("rich", true),
                consequence: up("happy", true),
            },
            english: "everyone in the room is happy if they is rich and vice versa",
            formula: Formula::forall(Formula::iff(u("rich", x()), u("happy", x()))),
            truth: true,
        },
        Case {
            shape: Shape::Biconditional {
                condition: up("night_owl", true),
                consequence: up("brave_person", false),
            },
            english: "everyone in the room is not a brave person if they is a night owl and vice versa",
            formula: Formula::forall(Formula::iff(u("night_owl", x()), not(u("brave_person", x())))),
            truth: false,
        },
        Case {
            shape: Shape::Someone(up("enjoys_mountain_biking", true)),
            english: "someone in the room enjoys mountain biking",
            formula: Formula::exists(u("enjoys_mountain_biking", x())),
            truth: true,
        },
        Case {
            shape: Shape::Someone(bp("richer_than", "nina", true)),
            english: "someone in the room is richer than Nina",
            formula: Formula::exists(b("richer_than", x(), c("nina"))),
            truth: false,
        },
        Case {
            shape: Shape::NotEveryone(up("owns_smart_tv", true)),
            english: "not everyone in the room owns a smart tv",
            formula: not(Formula::forall(u("owns_smart_tv", x()))),
            truth: false,
        },
        Case {
            shape: Shape::NotEveryone(up("rich", false)),
            english: "not everyone in the room is not rich",
            formula: not(Formula::forall(not(u("rich", x())))),
            truth: true,
        },
        Case {
            shape: Shape::AtLeast {
                k: 1,
                property: up("curious", true),
                more_than: false,
            },
            english: "at least one person in the room is curious",
            formula: Formula::at_least(1, u("curious", x())),
            truth: true,
        },
        Case {
            shape: Shape::AtLeast {
                k: 2,
                property: up("curious", true),
                more_than: false,
            },
            english: "at least two persons in the room is curious",
            formula: Formula::at_least(2, u("curious", x())),
            truth: false,
        },
        Case {
            shape: Shape::AtLeast {
                k: 2,
                property: up("rich", true),
                more_than: true,
            },
            english: "more than one person in the room is rich",
            formula: Formula::at_least(2, u("rich", x())),
            truth: true,
        },
        Case {
            shape: Shape::AtLeast {
                k: 3,
                property: up("owns_smart_tv", true),
                more_than: false,
            },
            english: "at least three persons in the room owns a smart tv",
            formula: Formula::at_least(3, u("owns_smart_tv", x())),
            truth: true,
        },
        Case {
            shape: Shape::Compound {
                op: Connective::Or,
                left: sentence("tower_leans", true),
                right: sentence("glass_rain", true),
            },
            english: "\u{201c}A tower leans significantly\u{201d} or \u{201c}Glass rain falls on a distant planet\u{201d} or both",
            formula: Formula::Or(vec![Formula::prop("tower_leans"), Formula::prop("glass_rain")]),
            truth: true,
        },
        Case {
            shape: Shape::Compound {
                op: Connective::Xor,
                left: person("mary", up("rich", true)),
                right: person("paul", up("rich", true)),
            },
            english: "\u{201c}Mary is rich\u{201d} or \u{201c}Paul is rich\u{201d} but not both",
            formula: not(Formula::iff(u("rich", c("mary")), u("rich", c("paul")))),
            truth: false,
        },
        Case {
            shape: Shape::Compound {
                op: Connective::Implies,
                left: sentence("tower_leans", true),
                right: person("gary", up("brave_person", true)),
            },
            english: "if \u{201c}A tower leans significantly\u{201d} then \u{201c}Gary is a brave person\u{201d}",
            formula: Formula::implies(Formula::prop("tower_leans"), u("brave_person", c("gary"))),
            truth: true,
        },
        Case {
            shape: Shape::Compound {
                op: Connective::Iff,
                left: sentence("glass_rain", true),
                right: person("walter", up("night_owl", true)),
            },
            english: "\u{201c}Glass rain falls on a distant planet\u{201d} if \u{201c}Walter is a night owl\u{201d} and vice versa",
            formula: Formula::iff(Formula::prop("glass_rain"), u("night_owl", c("walter"))),
            truth: false,
        },
        Case {
            shape: Shape::Compound {
                op: Connective::Nor,
                left: sentence("glass_rain", true),
                right: person("walter", up("rich", false)),
            },
            english: "neither \u{201c}Glass rain falls on a distant planet\u{201d} nor \u{201c}Walter is not rich\u{201d}",
            formula: Formula::And(vec![not(Formula::prop("glass_rain")), u("rich", c("walter"))]),
            truth: false,
        },
        Case {
            shape: Shape::NotTheCase(person("nina", up("happy", true))),
            english: "it is not the case that \u{201c}Nina is happy\u{201d}",
            formula: not(u("happy", c("nina"))),
            truth: false,
        },
        Case {
            shape: Shape::Either {
                subject: "mary".into(),
                left: up("rich", true),
                right: up("night_owl", true),
            },
            english: "Mary either is rich or is a night owl but not both",
            formula: not(Formula::iff(u("rich", c("mary")), u("night_owl", c("mary")))),
            truth: false,
        },
        Case {
            shape: Shape::Neither {
                subject: "gary".into(),
                left: up("rich", true),
                right: bp("hates", "mary", true),
            },
            english: "Gary neither is rich nor hates Mary",
            formula: Formula::And(vec![not(u("rich", c("gary"))), not(b("hates", c("gary"), c("mary")))]),
            truth: true,
        },
    ]
}

/// Room: Mary, Paul, Gary, Walter. Nina and Susan are outside.
fn model() -> (Domain, BTreeSet<GroundAtom>) {
    let roster: Vec<String> = ["mary", "paul", "gary", "walter", "nina", "susan"].map(String::from).to_vec();
    let room = roster[..4].to_vec();
    let mut sig = BTreeMap::new();
    for p in [
        "rich",
        "happy",
        "brave_person",
        "night_owl",
        "curious",
        "enjoys_mountain_biking",
        "owns_smart_tv",
    ] {
        sig.insert(p.to_string(), 1);
    }
    for p in ["liked_by", "hates", "richer_than", "sibling_of"] {
        sig.insert(p.to_string(), 2);
    }
    for p in ["tower_leans", "glass_rain", "round_tables_outlawed"] {
        sig.insert(p.to_string(), 0);
    }
    let domain = Domain::new(roster, room, sig).unwrap();
    let g1 = |p: &str, a: &str| GroundAtom::new(p, vec![a.into()]);
    let g2 = |p: &str, a: &str, b: &str| GroundAtom::new(p, vec![a.into(), b.into()]);
    let truth = BTreeSet::from([
        g1("rich", "mary"),
        g1("rich", "paul"),
        g1("happy", "mary"),
        g1("happy", "paul"),
        g1("happy", "nina"),
        g1("brave_person", "gary"),
        g1("night_owl", "mary"),
        g1("night_owl", "walter"),
        g1("curious", "gary"),
        g1("curious", "nina"),
        g1("enjoys_mountain_biking", "walter"),
        g1("owns_smart_tv", "mary"),
        g1("owns_smart_tv", "paul"),
        g1("owns_smart_tv", "gary"),
        g1("owns_smart_tv", "walter"),
        g2("liked_by", "paul", "gary"),
        g2("hates", "mary", "paul"),
        g2("hates", "paul", "mary"),
        g2("richer_than", "susan", "nina"),
        GroundAtom::new("tower_leans", vec![]),
    ]);
    (domain, truth)
}

#[test]
fn templates_render_and_formalize() {
    let g = Grammar::builtin(GrammarConfig::default()).unwrap();
    let all = cases();
    assert!(all.len() >= 30);
    for case in &all {
        let clause = g.realize(&case.shape);
        assert_eq!(clause.english, case.english);
        assert_eq!(clause.formula, case.formula, "{}", case.english);
    }
}

#[test]
fn formulas_mean_what_the_sentences_say() {
    let (domain, truth) = model();
    for case in cases() {
        let value = semantics::evaluate(&case.formula, &domain, &|a| truth.contains(a));
        assert_eq!(value, case.truth, "{}", case.english);
    }
}

#[test]
fn room_line_lists_the_room() {
    let g = Grammar::builtin(GrammarConfig {
        room_size: 3,
        ..GrammarConfig::default()
    })
    .unwrap();
    let clause = g.room_clause(&mut haystack_core::seed::rng(1));
    assert!(clause.english.ends_with(" are the only persons in the room."));
    let mut listed: Vec<String> = clause
        .english
        .trim_end_matches(" are the only persons in the room.")
        .split(", ")
        .map(haystack_core::forge::symbol_for)
        .collect();
    listed.sort();
    let mut room = g.domain().room().to_vec();
    room.sort();
    assert_eq!(listed, room);
}
