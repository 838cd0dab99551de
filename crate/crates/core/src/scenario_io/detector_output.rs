use super::xml::{
    check_attributes, elements, expect_root, leaf, num, parse_document, required, required_f64,
    XmlWriter,
};
use super::ParseError;
use crate::detectors::DetectorInterval;

fn sorted(intervals: &[DetectorInterval]) -> bool {
    intervals.windows(2).all(|w| {
        (w[0].id.as_str(), w[0].begin) < (w[1].id.as_str(), w[1].begin)
    })
}

/// Serializes intervals, which must be sorted by `(id, begin)`.
pub fn write_detector_output(intervals: &[DetectorInterval]) -> Result<Vec<u8>, ParseError> {
    if !sorted(intervals) {
        return Err(ParseError::Unsorted);
    }
    let mut w = XmlWriter::new();
    if intervals.is_empty() {
        w.empty(0, "detector", &[]);
        return Ok(w.finish());
    }
    w.open(0, "detector", &[]);
    for i in intervals {
        w.empty(
            1,
            "interval",
            &[
                ("begin", num(i.begin)),
                ("end", num(i.end)),
                ("id", i.id.clone()),
                ("nVehContrib", i.n_veh.to_string()),
                ("meanSpeed", num(i.mean_speed)),
                ("co2_mg", num(i.co2_mg)),
                ("fuel_ml", num(i.fuel_ml)),
            ],
        );
    }
    w.close(0, "detector");
    Ok(w.finish())
}

pub fn parse_detector_output(bytes: &[u8]) -> Result<Vec<DetectorInterval>, ParseError> {
    let doc = parse_document(bytes)?;
    let root = expect_root(&doc, "detector")?;
    let mut out = Vec::new();
    for el in elements(root)? {
        if el.tag_name().name() != "interval" {
            return Err(ParseError::Schema {
                element: el.tag_name().name().to_string(),
                message: "unknown element inside <detector>".into(),
            });
        }
        check_attributes(
            el,
            &["begin", "end", "id", "nVehContrib", "meanSpeed", "co2_mg", "fuel_ml"],
        )?;
        leaf(el)?;
        let raw_n = required(el, "nVehContrib")?;
        let interval = DetectorInterval {
            id: required(el, "id")?.to_string(),
            begin: required_f64(el, "begin")?,
            end: required_f64(el, "end")?,
            n_veh: raw_n
                .trim()
                .parse()
                .map_err(|_| super::xml::bad_value(el, "nVehContrib", raw_n))?,
            mean_speed: required_f64(el, "meanSpeed")?,
            co2_mg: required_f64(el, "co2_mg")?,
            fuel_ml: required_f64(el, "fuel_ml")?,
        };
        if let Err(message) = interval.check() {
            return Err(ParseError::InvalidInterval {
                id: interval.id,
                begin: interval.begin,
                message: message.to_string(),
            });
        }
        out.push(interval);
    }
    if !sorted(&out) {
        return Err(ParseError::Unsorted);
    }
    Ok(out)
}
