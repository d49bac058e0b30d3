use rentsplit::manipulation::{
    best_response_search, coalition_search, evaluate_deviation, joint_search, template_flatten,
    ManipulationObjective, SearchConfig,
};
use rentsplit::scenario::builtin::{BASELINE, SCENARIO1, SCENARIO3};
use rentsplit::{Error, Instance, Mechanism, Rational, ValuationMatrix};

fn rent() -> Rational {
    Rational::integer(36)
}

fn truth() -> ValuationMatrix {
    ValuationMatrix::from_integers(&BASELINE)
}

#[test]
fn exclusion_succeeds_and_hurts_the_victims_under_truth() {
    let inst = Instance::lettered(5, rent()).unwrap();
    let obj = ManipulationObjective::parse("exclude:D,E@R1,R2,R3", &inst).unwrap();
    let reported = ValuationMatrix::from_integers(&SCENARIO1);
    let d = evaluate_deviation(&Mechanism::new(), &rent(), &truth(), &reported, &obj).unwrap();
    assert!(d.objective_satisfied);
    // The coalition overpays in money but A keeps its true utility; the
    // point of the exercise is placement, not savings.
    assert_eq!(d.payment_delta[0], Rational::integer(5));
    assert!(!d.envy_under_truth.is_empty());
}

#[test]
fn subsidy_places_the_beneficiary_below_the_cap() {
    let inst = Instance::lettered(5, rent()).unwrap();
    let obj = ManipulationObjective::parse("subsidize:E@R1<=7", &inst).unwrap();
    let reported = ValuationMatrix::from_integers(&SCENARIO3);
    let d = evaluate_deviation(&Mechanism::new(), &rent(), &truth(), &reported, &obj).unwrap();
    assert!(d.objective_satisfied);
    assert_eq!(d.manipulated.assignment.room_of(4), 0);
    assert_eq!(d.payment_delta[4], Rational::new(-6, 5));
}

#[test]
fn flattening_lowers_the_coalition_bill() {
    let obj = ManipulationObjective::MinimizeCoalitionPayments(vec![3, 4]);
    let reported = template_flatten(&truth(), &rent(), &[(3, 3), (4, 4)]).unwrap();
    let d = evaluate_deviation(&Mechanism::new(), &rent(), &truth(), &reported, &obj).unwrap();
    assert!(d.objective_satisfied);
    assert_eq!(d.manipulated.payment(3), &Rational::new(32, 5));
    assert_eq!(d.manipulated.payment(4), &Rational::new(32, 5));
}

#[test]
fn oversized_searches_are_refused_up_front() {
    let obj = ManipulationObjective::MinimizeOwnPayment(0);
    let cfg = SearchConfig {
        budget: 100,
        ..SearchConfig::default()
    };
    let err = best_response_search(&Mechanism::new(), &truth(), &rent(), 0, &obj, &cfg);
    match err {
        Err(Error::SearchSpaceTooLarge { count, budget }) => {
            // 36 units over 5 rooms: C(40, 4).
            assert_eq!(count, 91_390);
            assert_eq!(budget, 100);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn step_must_divide_the_rent() {
    let obj = ManipulationObjective::MinimizeOwnPayment(0);
    let cfg = SearchConfig {
        step: Rational::integer(5),
        ..SearchConfig::default()
    };
    assert!(matches!(
        best_response_search(&Mechanism::new(), &truth(), &rent(), 0, &obj, &cfg),
        Err(Error::InvalidStep(_))
    ));
}

#[test]
fn search_results_do_not_depend_on_thread_count() {
    let obj = ManipulationObjective::MinimizeOwnPayment(3);
    let cfg = SearchConfig {
        step: Rational::integer(3),
        ..SearchConfig::default()
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                best_response_search(&Mechanism::new(), &truth(), &rent(), 3, &obj, &cfg).unwrap()
            })
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert!(one.score >= one.baseline_score);
}

#[test]
fn joint_search_is_at_least_as_good_as_coordinate_ascent() {
    // Small grid so the joint space stays tiny: 3 rooms, rent 6.
    let truth = ValuationMatrix::from_integers(&[[3, 2, 1], [2, 2, 2], [1, 2, 3]]);
    let total = Rational::integer(6);
    let obj = ManipulationObjective::MinimizeCoalitionPayments(vec![0, 1]);
    let cfg = SearchConfig::default();
    let mech = Mechanism::new();
    let joint = joint_search(&mech, &truth, &total, &[0, 1], &obj, &cfg).unwrap();
    let ascent = coalition_search(&mech, &truth, &total, &[0, 1], &obj, &cfg).unwrap();
    assert!(joint.score >= ascent.score);
    assert!(ascent.score >= ascent.honest_score);
    assert!(ascent.history.windows(2).all(|w| w[0] <= w[1]));
}
