//! JSON form of a fixed tour with per-scenario actions.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::{FixedTour, Metric, RTour, RecourseAction, ServedTour};

fn violation(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::SchemaViolation { location: location.into(), message: message.into() }
}

pub fn tour_to_json(metric: &Metric, t: &RTour) -> Value {
    Value::Array(t.seq().iter().map(|&v| Value::String(metric.name(v).to_string())).collect())
}

fn served_to_json(metric: &Metric, served: &[(usize, u32)]) -> Value {
    Value::Array(served.iter().map(|&(v, q)| json!([metric.name(v), q])).collect())
}

pub fn fixed_to_json(metric: &Metric, fixed: &FixedTour) -> Value {
    Value::Array(fixed.rtours().iter().map(|t| tour_to_json(metric, t)).collect())
}

pub fn action_to_json(metric: &Metric, a: &RecourseAction) -> Value {
    json!({
        "served": a.served.iter().map(|s| served_to_json(metric, s)).collect::<Vec<_>>(),
        "recourse": a
            .recourse
            .iter()
            .map(|st| json!({ "tour": tour_to_json(metric, &st.tour), "served": served_to_json(metric, &st.served) }))
            .collect::<Vec<_>>(),
    })
}

fn point(metric: &Metric, v: &Value, at: &str) -> Result<usize> {
    let name = v.as_str().ok_or_else(|| violation(at, "expected a point name"))?;
    metric.index_of(name).ok_or_else(|| violation(at, format!("unknown point {name:?}")))
}

fn tour_from_json(metric: &Metric, v: &Value, at: &str) -> Result<RTour> {
    let seq = v
        .as_array()
        .ok_or_else(|| violation(at, "expected a list of points"))?
        .iter()
        .enumerate()
        .map(|(k, p)| point(metric, p, &format!("{at}[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    RTour::new(metric, seq).map_err(|e| violation(at, e.to_string()))
}

fn served_from_json(metric: &Metric, v: &Value, at: &str) -> Result<Vec<(usize, u32)>> {
    let items = v.as_array().ok_or_else(|| violation(at, "expected a list of [point, demand] pairs"))?;
    items
        .iter()
        .enumerate()
        .map(|(k, it)| {
            let at = format!("{at}[{k}]");
            let pair = it.as_array().filter(|p| p.len() == 2).ok_or_else(|| violation(&at, "expected [point, demand]"))?;
            let q = pair[1]
                .as_u64()
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| violation(&at, "expected a non-negative demand"))?;
            Ok((point(metric, &pair[0], &at)?, q))
        })
        .collect()
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str, at: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| violation(format!("{at}.{key}"), "missing field"))
}

/// Reads `fixed_tour.rtours` and `actions` from a solution document.
pub fn parse_solution(metric: &Metric, text: &str) -> Result<(FixedTour, Vec<RecourseAction>)> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| violation(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let root = doc.as_object().ok_or_else(|| violation("$", "expected an object"))?;
    let ft = get(root, "fixed_tour", "$")?.as_object().ok_or_else(|| violation("$.fixed_tour", "expected an object"))?;
    let rtours = get(ft, "rtours", "$.fixed_tour")?
        .as_array()
        .ok_or_else(|| violation("$.fixed_tour.rtours", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(j, t)| tour_from_json(metric, t, &format!("$.fixed_tour.rtours[{j}]")))
        .collect::<Result<Vec<_>>>()?;
    let fixed = FixedTour::new(rtours);
    let actions = get(root, "actions", "$")?
        .as_array()
        .ok_or_else(|| violation("$.actions", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let at = format!("$.actions[{i}]");
            let obj = a.as_object().ok_or_else(|| violation(&at, "expected an object"))?;
            let served = get(obj, "served", &at)?
                .as_array()
                .ok_or_else(|| violation(format!("{at}.served"), "expected an array"))?
                .iter()
                .enumerate()
                .map(|(j, s)| served_from_json(metric, s, &format!("{at}.served[{j}]")))
                .collect::<Result<Vec<_>>>()?;
            let recourse = get(obj, "recourse", &at)?
                .as_array()
                .ok_or_else(|| violation(format!("{at}.recourse"), "expected an array"))?
                .iter()
                .enumerate()
                .map(|(k, st)| {
                    let at = format!("{at}.recourse[{k}]");
                    let o = st.as_object().ok_or_else(|| violation(&at, "expected an object"))?;
                    Ok(ServedTour {
                        tour: tour_from_json(metric, get(o, "tour", &at)?, &format!("{at}.tour"))?,
                        served: served_from_json(metric, get(o, "served", &at)?, &format!("{at}.served"))?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RecourseAction { served, recourse })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((fixed, actions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::evaluate_objective;
    use crate::model::tests::core_instance;
    use crate::oracle::{exact_stoch_vrp, OracleCaps};
    use crate::rational::int;

    #[test]
    fn round_trip_oracle_solution() {
        let inst = core_instance(2);
        let opt = exact_stoch_vrp(&inst, OracleCaps::default()).unwrap();
        let doc = json!({
            "fixed_tour": { "rtours": fixed_to_json(&inst.metric, &opt.fixed) },
            "actions": opt.actions.iter().map(|a| action_to_json(&inst.metric, a)).collect::<Vec<_>>(),
        });
        let (fixed, actions) = parse_solution(&inst.metric, &doc.to_string()).unwrap();
        assert_eq!(fixed, opt.fixed);
        assert_eq!(actions, opt.actions);
        assert_eq!(evaluate_objective(&inst, &fixed, &actions).unwrap(), int(4));
    }

    #[test]
    fn unknown_point_is_located() {
        let inst = core_instance(1);
        let text = r#"{"fixed_tour": {"rtours": [["r", "zz", "r"]]}, "actions": []}"#;
        match parse_solution(&inst.metric, text) {
            Err(Error::SchemaViolation { location, .. }) => assert_eq!(location, "$.fixed_tour.rtours[0][1]"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
