use std::collections::HashSet;

use super::xml::{
    check_attributes, elements, expect_root, id_list, leaf, num, optional_f64, parse_document,
    required, required_f64, unique, XmlWriter,
};
use super::{ParseError, StopSpec, VehicleSpec, VehicleTypeSpec, DEFAULT_DWELL_S};
use crate::net_model::{NetError, Route};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RouteFile {
    pub vtypes: Vec<VehicleTypeSpec>,
    pub vehicles: Vec<VehicleSpec>,
    pub routes: Vec<Route>,
}

/// Parses a route file. References between vehicles, types and routes, and
/// route connectivity, are checked when the scenario is loaded.
pub fn parse_routes_file(bytes: &[u8]) -> Result<RouteFile, ParseError> {
    let doc = parse_document(bytes)?;
    let root = expect_root(&doc, "routes")?;

    let mut out = RouteFile::default();
    let (mut vt_ids, mut route_ids, mut veh_ids) = (HashSet::new(), HashSet::new(), HashSet::new());
    for el in elements(root)? {
        match el.tag_name().name() {
            "vType" => {
                check_attributes(
                    el,
                    &[
                        "id",
                        "vClass",
                        "maxSpeed",
                        "minSpeed",
                        "accel",
                        "decel",
                        "length",
                        "minGap",
                        "sigma",
                        "emissionClass",
                    ],
                )?;
                leaf(el)?;
                let id = required(el, "id")?;
                unique(&mut vt_ids, id)?;
                let vt = VehicleTypeSpec {
                    id: id.to_string(),
                    vclass: required(el, "vClass")?.parse()?,
                    max_speed: required_f64(el, "maxSpeed")?,
                    min_speed: required_f64(el, "minSpeed")?,
                    accel: required_f64(el, "accel")?,
                    decel: required_f64(el, "decel")?,
                    length: required_f64(el, "length")?,
                    min_gap: required_f64(el, "minGap")?,
                    sigma: required_f64(el, "sigma")?,
                    emission_class: required(el, "emissionClass")?.to_string(),
                };
                vt.validate()?;
                out.vtypes.push(vt);
            }
            "route" => {
                check_attributes(el, &["id", "edges"])?;
                leaf(el)?;
                let id = required(el, "id")?;
                unique(&mut route_ids, id)?;
                let edges = id_list(required(el, "edges")?);
                if edges.is_empty() {
                    return Err(NetError::EmptyRoute(id.to_string()).into());
                }
                out.routes.push(Route {
                    id: id.to_string(),
                    edges,
                });
            }
            "vehicle" => {
                check_attributes(el, &["id", "type", "route", "depart"])?;
                let id = required(el, "id")?;
                unique(&mut veh_ids, id)?;
                let depart = required_f64(el, "depart")?;
                if depart < 0.0 {
                    return Err(ParseError::NegativeDepart(id.to_string()));
                }
                let mut stops = Vec::new();
                for st in elements(el)? {
                    if st.tag_name().name() != "stop" {
                        return Err(ParseError::Schema {
                            element: st.tag_name().name().to_string(),
                            message: "unknown element inside <vehicle>".into(),
                        });
                    }
                    check_attributes(st, &["containerStop", "dwell"])?;
                    leaf(st)?;
                    let dwell = optional_f64(st, "dwell")?.unwrap_or(DEFAULT_DWELL_S);
                    if dwell < 0.0 {
                        return Err(ParseError::NegativeDwell(id.to_string()));
                    }
                    stops.push(StopSpec {
                        container_stop: required(st, "containerStop")?.to_string(),
                        dwell,
                    });
                }
                out.vehicles.push(VehicleSpec {
                    id: id.to_string(),
                    vtype: required(el, "type")?.to_string(),
                    route: required(el, "route")?.to_string(),
                    depart,
                    stops,
                });
            }
            other => {
                return Err(ParseError::Schema {
                    element: other.to_string(),
                    message: "unknown element inside <routes>".into(),
                })
            }
        }
    }
    Ok(out)
}

pub fn write_routes_file(file: &RouteFile) -> Vec<u8> {
    let mut w = XmlWriter::new();
    w.open(0, "routes", &[]);
    for vt in &file.vtypes {
        w.empty(
            1,
            "vType",
            &[
                ("id", vt.id.clone()),
                ("vClass", vt.vclass.as_str().to_string()),
                ("maxSpeed", num(vt.max_speed)),
                ("minSpeed", num(vt.min_speed)),
                ("accel", num(vt.accel)),
                ("decel", num(vt.decel)),
                ("length", num(vt.length)),
                ("minGap", num(vt.min_gap)),
                ("sigma", num(vt.sigma)),
                ("emissionClass", vt.emission_class.clone()),
            ],
        );
    }
    for r in &file.routes {
        w.empty(1, "route", &[("id", r.id.clone()), ("edges", r.edges.join(" "))]);
    }
    for v in &file.vehicles {
        let attrs = [
            ("id", v.id.clone()),
            ("type", v.vtype.clone()),
            ("route", v.route.clone()),
            ("depart", num(v.depart)),
        ];
        if v.stops.is_empty() {
            w.empty(1, "vehicle", &attrs);
            continue;
        }
        w.open(1, "vehicle", &attrs);
        for s in &v.stops {
            w.empty(
                2,
                "stop",
                &[("containerStop", s.container_stop.clone()), ("dwell", num(s.dwell))],
            );
        }
        w.close(1, "vehicle");
    }
    w.close(0, "routes");
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario_io::VehicleClass;

    fn vtype_xml(id: &str, class: &str) -> String {
        format!(
            r#"<vType id="{id}" vClass="{class}" maxSpeed="15" minSpeed="5" accel="1" decel="4" length="18.75" minGap="2.5" sigma="0" emissionClass="HBEFA3/HDV_G"/>"#
        )
    }

    #[test]
    fn bundled_vehicle_with_two_stops() {
        let xml = format!(
            r#"<routes>{}<route id="r" edges="a b c"/>
            <vehicle id="double" type="truck_double" route="r" depart="0">
                <stop containerStop="spar_university" dwell="90"/>
                <stop containerStop="spar_dornach"/>
            </vehicle></routes>"#,
            vtype_xml("truck_double", "truck_double")
        );
        let f = parse_routes_file(xml.as_bytes()).unwrap();
        assert_eq!(f.vtypes[0].vclass, VehicleClass::TruckDouble);
        assert_eq!(f.vehicles.len(), 1);
        assert_eq!(f.vehicles[0].stops.len(), 2);
        assert_eq!(f.vehicles[0].stops[1].dwell, DEFAULT_DWELL_S);
        assert_eq!(f.routes[0].edges, ["a", "b", "c"]);
        assert_eq!(parse_routes_file(&write_routes_file(&f)).unwrap(), f);
    }

    #[test]
    fn negative_depart() {
        let xml = r#"<routes><vehicle id="v" type="t" route="r" depart="-1"/></routes>"#;
        assert_eq!(
            parse_routes_file(xml.as_bytes()).unwrap_err(),
            ParseError::NegativeDepart("v".into())
        );
    }

    #[test]
    fn unknown_vclass() {
        let xml = format!("<routes>{}</routes>", vtype_xml("t", "bus"));
        assert_eq!(
            parse_routes_file(xml.as_bytes()).unwrap_err(),
            ParseError::UnknownVClass("bus".into())
        );
    }

    #[test]
    fn vtype_invariants() {
        let xml = format!("<routes>{}</routes>", vtype_xml("t", "truck_single"))
            .replace("minSpeed=\"5\"", "minSpeed=\"20\"");
        assert!(matches!(
            parse_routes_file(xml.as_bytes()),
            Err(ParseError::InvalidVType { .. })
        ));
    }

    #[test]
    fn duplicate_and_empty() {
        let xml = r#"<routes><route id="r" edges="a"/><route id="r" edges="b"/></routes>"#;
        assert_eq!(
            parse_routes_file(xml.as_bytes()).unwrap_err(),
            ParseError::DuplicateId("r".into())
        );
        let xml = r#"<routes><route id="r" edges=" "/></routes>"#;
        assert!(matches!(parse_routes_file(xml.as_bytes()), Err(ParseError::Net(_))));
        assert_eq!(parse_routes_file(b"<routes/>").unwrap(), RouteFile::default());
    }
}
