mod common;

use std::collections::BTreeMap;

use iw_core::schema::{
    categorical_context, expected_contents, parse_schema, serialize_schema, validate_schema,
    ActivityCategory, AssocEdge, ConceptRelation, ContentCategory, FlowEdge, FlowKind, LinkKind,
    RelatedConcept, Role, SchemaError, SemanticConcept, SemanticLink, TaskTypeSchema, TemplateEdge,
};
use proptest::prelude::*;

use common::{flow_oracle, patient_care};

#[test]
fn fixture_parses_with_four_activities_and_five_contents() {
    let s = patient_care();
    assert_eq!(s.activities.len(), 4);
    assert_eq!(s.contents.len(), 5);
    assert!(validate_schema(&s).errors.is_empty());
}

#[test]
fn fixture_file_is_in_canonical_form() {
    let text = std::fs::read_to_string(common::fixtures().join("patient-care.schema.json")).unwrap();
    assert_eq!(serialize_schema(&parse_schema(&text).unwrap()), text);
}

#[test]
fn empty_schema_is_valid() {
    let s = parse_schema(
        r#"{"id":"e","name":"E","version":1,"activities":[],"contents":[],"concepts":[],
            "flow_edges":[],"assoc_edges":[],"template_edges":[],"semantic_links":[]}"#,
    )
    .unwrap();
    assert!(validate_schema(&s).is_empty());
}

#[test]
fn unknown_flow_endpoint_is_a_dangling_reference() {
    let mut s = patient_care();
    s.flow_edges.push(FlowEdge {
        from: "diagnosis".into(),
        to: "surgery".into(),
        kind: FlowKind::Precedes,
    });
    let err = parse_schema(&serde_json::to_string(&s).unwrap()).unwrap_err();
    assert!(matches!(err, SchemaError::DanglingReference { .. }), "{err:?}");
}

#[test]
fn syntax_errors_carry_a_position() {
    match parse_schema("{\n  \"id\": \"x\",\n  oops\n}") {
        Err(SchemaError::Syntax { line, column, .. }) => {
            assert_eq!(line, 3);
            assert!(column > 0);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let mut v: serde_json::Value = serde_json::to_value(patient_care()).unwrap();
    v["owner"] = "someone".into();
    assert!(parse_schema(&v.to_string()).is_err());
}

#[test]
fn duplicate_ids_are_rejected() {
    let mut s = patient_care();
    s.contents.push(ContentCategory {
        id: "examine".into(),
        name: "Clash".into(),
        description: String::new(),
    });
    assert!(matches!(
        parse_schema(&serde_json::to_string(&s).unwrap()),
        Err(SchemaError::DuplicateId(id)) if id == "examine"
    ));
}

#[test]
fn decomposition_cycle_is_an_error() {
    let mut s = patient_care();
    for (from, to) in [("examine", "diagnosis"), ("diagnosis", "examine")] {
        s.flow_edges.push(FlowEdge {
            from: from.into(),
            to: to.into(),
            kind: FlowKind::DecomposesInto,
        });
    }
    let report = validate_schema(&s);
    assert!(report.has_error("decomposition_cycle"), "{report:?}");
}

#[test]
fn iteration_cycles_are_allowed() {
    // the fixture already loops plan-treatment -> examine
    assert!(patient_care()
        .flow_edges
        .iter()
        .any(|e| e.kind == FlowKind::IteratesTo));
    assert!(validate_schema(&patient_care()).is_valid());
}

#[test]
fn unproduced_content_is_only_a_warning() {
    let mut s = patient_care();
    s.assoc_edges
        .retain(|e| !(e.content == "treatment-plan" && e.role == Role::Produces));
    let report = validate_schema(&s);
    assert!(report.errors.is_empty(), "{report:?}");
    assert!(report.has_warning("unproduced_content"));
}

#[test]
fn diagnosis_context_at_radius_one() {
    let s = patient_care();
    let ctx = categorical_context(&s, "diagnosis", 1).unwrap();
    let ids = |v: &[iw_core::schema::ContextActivity]| v.iter().map(|a| a.id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(&ctx.before), ["examine"]);
    assert_eq!(ids(&ctx.after), ["plan-treatment"]);
    let own = ctx.associations_of("diagnosis").unwrap();
    assert_eq!(own.produces, ["differential-diagnostic"]);
    assert_eq!(own.consumes, ["initial-impression", "test-result"]);
    assert!(ctx.concepts.contains(&"differential-diagnosis".to_string()));
}

#[test]
fn zero_radius_is_the_activity_alone() {
    let s = patient_care();
    for a in &s.activities {
        let ctx = categorical_context(&s, &a.id, 0).unwrap();
        assert!(ctx.before.is_empty() && ctx.after.is_empty());
        assert_eq!(ctx.associations.len(), 1);
        assert_eq!(ctx.associations[0].activity, a.id);
    }
}

#[test]
fn unknown_activity_is_rejected() {
    assert!(matches!(
        categorical_context(&patient_care(), "surgery", 1),
        Err(SchemaError::UnknownActivity(_))
    ));
    assert!(expected_contents(&patient_care(), "surgery").is_err());
}

#[test]
fn expected_contents_for_diagnosis() {
    let got = expected_contents(&patient_care(), "diagnosis").unwrap();
    assert_eq!(
        got,
        vec![
            ("differential-diagnostic".to_string(), Role::Produces),
            ("initial-impression".to_string(), Role::Consumes),
            ("test-result".to_string(), Role::Consumes),
        ]
    );
}

#[test]
fn expected_contents_equals_filtered_edge_list() {
    let s = patient_care();
    for a in &s.activities {
        let mut oracle: Vec<(String, Role)> = s
            .assoc_edges
            .iter()
            .filter(|e| e.activity == a.id)
            .map(|e| (e.content.clone(), e.role))
            .collect();
        oracle.sort();
        assert_eq!(expected_contents(&s, &a.id).unwrap(), oracle);
    }
}

#[test]
fn activity_with_no_associations_expects_nothing() {
    let mut s = patient_care();
    s.activities.push(ActivityCategory {
        id: "discharge".into(),
        name: "Discharge".into(),
        description: String::new(),
    });
    assert!(expected_contents(&s, "discharge").unwrap().is_empty());
}

fn assert_matches_flow_oracle(s: &TaskTypeSchema, a: &str, r: u32) {
    let ctx = categorical_context(s, a, r).unwrap();
    let (before, after) = flow_oracle(s, a, r);
    let got = |v: &[iw_core::schema::ContextActivity]| -> BTreeMap<String, u32> {
        v.iter().map(|x| (x.id.clone(), x.hops)).collect()
    };
    assert_eq!(got(&ctx.before), before, "before of {a} at radius {r}");
    assert_eq!(got(&ctx.after), after, "after of {a} at radius {r}");
}

#[test]
fn fixture_context_matches_flow_oracle_up_to_radius_four() {
    let s = patient_care();
    for a in &s.activities {
        for r in 0..=4 {
            assert_matches_flow_oracle(&s, &a.id, r);
        }
    }
}

prop_compose! {
    fn arb_schema()(
        n_act in 0usize..7,
        n_con in 0usize..6,
        n_cpt in 0usize..5,
    )(
        flows in prop::collection::vec((0..n_act.max(1), 0..n_act.max(1), 0u8..3), 0..12),
        assocs in prop::collection::vec((0..n_act.max(1), 0..n_con.max(1), any::<bool>()), 0..12),
        templates in prop::collection::vec((0..n_con.max(1), 0..n_con.max(1), any::<bool>()), 0..8),
        related in prop::collection::vec((0..n_cpt.max(1), 0..n_cpt.max(1), 0u8..3), 0..6),
        links in prop::collection::vec((any::<bool>(), 0..n_act.max(n_con).max(1), 0..n_cpt.max(1)), 0..6),
        version in 1u32..5,
        n_act in Just(n_act), n_con in Just(n_con), n_cpt in Just(n_cpt),
    ) -> TaskTypeSchema {
        let act = |i: usize| format!("a{i}");
        let con = |i: usize| format!("c{i}");
        let cpt = |i: usize| format!("k{i}");
        let mut s = TaskTypeSchema::empty("gen", "Generated", version);
        s.activities = (0..n_act).map(|i| ActivityCategory { id: act(i), name: format!("Act {i}"), description: String::new() }).collect();
        s.contents = (0..n_con).map(|i| ContentCategory { id: con(i), name: format!("Con {i}"), description: "d".into() }).collect();
        s.concepts = (0..n_cpt).map(|i| SemanticConcept { id: cpt(i), label: format!("label {i}"), definition: String::new(), related: Vec::new() }).collect();
        if n_act > 0 {
            for (f, t, k) in flows {
                // precedes and decomposes-into only run forward, so they stay acyclic
                let kind = [FlowKind::Precedes, FlowKind::IteratesTo, FlowKind::DecomposesInto][k as usize];
                if kind != FlowKind::IteratesTo && f >= t {
                    continue;
                }
                s.flow_edges.push(FlowEdge { from: act(f), to: act(t), kind });
            }
        }
        if n_act > 0 && n_con > 0 {
            for (a, c, p) in assocs {
                let role = if p { Role::Produces } else { Role::Consumes };
                if !s.assoc_edges.iter().any(|e| e.activity == act(a) && e.content == con(c) && e.role == role) {
                    s.assoc_edges.push(AssocEdge { activity: act(a), content: con(c), role });
                }
            }
            for (f, t, ds) in templates {
                s.template_edges.push(TemplateEdge { from: con(f), to: con(t), kind: if ds { LinkKind::Ds } else { LinkKind::Rs } });
            }
        }
        if n_cpt > 0 {
            for (f, t, r) in related {
                if f != t {
                    let relation = [ConceptRelation::Broader, ConceptRelation::Narrower, ConceptRelation::Related][r as usize];
                    s.concepts[f].related.push(RelatedConcept { concept: cpt(t), relation });
                }
            }
            for (on_activity, i, k) in links {
                let category = if on_activity && n_act > 0 { act(i % n_act) } else if n_con > 0 { con(i % n_con) } else { continue };
                s.semantic_links.push(SemanticLink { category, concept: cpt(k) });
            }
        }
        s
    }
}

proptest! {
    #[test]
    fn serialization_round_trips(s in arb_schema()) {
        prop_assert!(validate_schema(&s).is_valid(), "{:?}", validate_schema(&s));
        let text = serialize_schema(&s);
        let back = parse_schema(&text).unwrap();
        let mut canon = s.clone();
        canon.canonicalize();
        prop_assert_eq!(&back, &canon);
        prop_assert_eq!(serialize_schema(&back), text);
    }

    #[test]
    fn deleting_a_referenced_node_is_always_flagged(s in arb_schema(), pick in any::<prop::sample::Index>()) {
        let mut referenced: Vec<String> = Vec::new();
        referenced.extend(s.flow_edges.iter().flat_map(|e| [e.from.clone(), e.to.clone()]));
        referenced.extend(s.assoc_edges.iter().flat_map(|e| [e.activity.clone(), e.content.clone()]));
        referenced.extend(s.template_edges.iter().flat_map(|e| [e.from.clone(), e.to.clone()]));
        referenced.extend(s.semantic_links.iter().flat_map(|l| [l.category.clone(), l.concept.clone()]));
        referenced.extend(s.concepts.iter().flat_map(|c| c.related.iter().map(|r| r.concept.clone())));
        prop_assume!(!referenced.is_empty());
        let victim = pick.get(&referenced).clone();
        let mut broken = s.clone();
        broken.activities.retain(|a| a.id != victim);
        broken.contents.retain(|c| c.id != victim);
        broken.concepts.retain(|c| c.id != victim);
        prop_assert!(!validate_schema(&broken).errors.is_empty());
    }

    #[test]
    fn context_matches_flow_oracle(s in arb_schema(), r in 0u32..5) {
        for a in &s.activities {
            assert_matches_flow_oracle(&s, &a.id, r);
        }
    }

    #[test]
    fn context_is_monotone_in_radius(s in arb_schema(), r in 0u32..4) {
        for a in &s.activities {
            let small = categorical_context(&s, &a.id, r).unwrap();
            let large = categorical_context(&s, &a.id, r + 1).unwrap();
            prop_assert!(small.activities().is_subset(&large.activities()));
        }
    }
}
