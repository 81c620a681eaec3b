use fuzzypov::core::survey_data::{DesignInfo, Observation, SurveyDataset};
use fuzzypov::csvio::{read_csv, write_csv, Schema};
use proptest::prelude::*;

fn observation() -> impl Strategy<Value = Observation> {
    (
        "[a-z0-9]{1,6}",
        "[A-Z]{1,3}",
        "[a-z]{1,4}",
        "[A-Za-z ,\"]{1,8}",
        0.0f64..1e4,
        prop_oneof![Just(0.0), 0.0f64..1e7, any::<u32>().prop_map(f64::from)],
    )
        .prop_map(|(id, stratum, psu, area, weight, income)| Observation {
            unit_id: id.clone(),
            household_id: format!("h{id}"),
            stratum,
            psu,
            area: area.trim().to_string(),
            weight,
            income,
        })
}

proptest! {
    #[test]
    fn write_then_read_is_identity(obs in prop::collection::vec(observation(), 1..40)) {
        prop_assume!(obs.iter().all(|o| !o.area.is_empty()));
        prop_assume!(obs.iter().map(|o| o.weight).sum::<f64>() > 0.0);
        let obs: Vec<Observation> =
            obs.into_iter().enumerate().map(|(i, o)| Observation { unit_id: format!("{i}-{}", o.unit_id), ..o }).collect();
        let data = SurveyDataset::new(obs, DesignInfo::complex()).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &data).unwrap();
        let back = read_csv(buf.as_slice(), &Schema::default(), DesignInfo::complex()).unwrap();
        prop_assert_eq!(back, data);
    }
}
