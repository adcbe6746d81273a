use foresight_core::floorgen::{validate_against, ClassQuota};
use foresight_core::{generate_floorplan, validate_floorplan, ClassId, FloorplanSpec};

#[test]
fn thousand_seeds_validate() {
    for seed in 0..1000 {
        let spec = FloorplanSpec::with_seed(seed);
        let plan = generate_floorplan(&spec).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let report = validate_against(&plan, &spec);
        assert!(report.is_empty(), "seed {seed}: {:?}", report.violations);
    }
}

#[test]
fn same_seed_same_bytes() {
    for seed in [0, 17, 4242] {
        let spec = FloorplanSpec::with_seed(seed);
        let a = generate_floorplan(&spec).unwrap();
        let b = generate_floorplan(&spec).unwrap();
        assert_eq!(a.labels.to_raw(), b.labels.to_raw());
    }
}

#[test]
fn every_plan_has_one_living_room_and_an_entrance() {
    for seed in 0..200 {
        let plan = generate_floorplan(&FloorplanSpec::with_seed(seed)).unwrap();
        let living = plan.rooms.iter().filter(|r| r.class == ClassId::LIVING_ROOM).count();
        assert_eq!(living, 1, "seed {seed}");
        assert_eq!(plan.labels.get(plan.entrance), ClassId::ENTRANCE_DOOR);
        assert!(validate_floorplan(&plan).is_empty());
    }
}

#[test]
fn other_sizes_validate() {
    for (h, w) in [(16, 16), (20, 32), (40, 40)] {
        for seed in 0..50 {
            let spec = FloorplanSpec {
                height: h,
                width: w,
                room_count_range: (2, 5),
                class_quota: ClassQuota::default(),
                ..FloorplanSpec::with_seed(seed)
            };
            let plan = generate_floorplan(&spec).unwrap_or_else(|e| panic!("{h}x{w} seed {seed}: {e}"));
            assert!(validate_against(&plan, &spec).is_empty());
        }
    }
}
