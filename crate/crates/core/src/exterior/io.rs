//! Form files: an RSFF field with one component per stored tuple, plus a
//! JSON sidecar (`<name>.json`) listing the degree and 1-based tuples.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{IndexTuple, KForm};
use crate::fields::{io as field_io, ScalarField, VectorField};
use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    degree: usize,
    tuples: Vec<Vec<usize>>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes `form`. A form with no stored tuples is written as a single zero
/// component with an empty tuple list.
pub fn write_form(path: &Path, form: &KForm<ScalarField>, time: f64) -> Result<()> {
    let components: Vec<ScalarField> = if form.is_empty() {
        vec![ScalarField::zeros(form.grid())]
    } else {
        form.iter().map(|(_, c)| c.clone()).collect()
    };
    field_io::write(path, &VectorField::new(components)?, time)?;
    let sidecar = Sidecar {
        degree: form.degree(),
        tuples: form.tuples().map(IndexTuple::to_one_based).collect(),
    };
    let side = sidecar_path(path);
    std::fs::write(&side, serde_json::to_string_pretty(&sidecar)?).map_err(|e| Error::io(&side, e))
}

pub fn read_form(path: &Path) -> Result<(KForm<ScalarField>, f64)> {
    let (field, time) = field_io::read(path)?;
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let sidecar: Sidecar = serde_json::from_str(&text)?;
    let grid = field.grid().clone();
    if sidecar.tuples.is_empty() {
        return Ok((KForm::zero(&grid, sidecar.degree), time));
    }
    if sidecar.tuples.len() != field.ncomp() {
        return Err(Error::Format(format!(
            "sidecar lists {} tuples but the field has {} components",
            sidecar.tuples.len(),
            field.ncomp()
        )));
    }
    let tuples = sidecar
        .tuples
        .iter()
        .map(|t| IndexTuple::one_based(t))
        .collect::<Result<Vec<_>>>()?;
    let form = KForm::from_terms(
        &grid,
        sidecar.degree,
        tuples.into_iter().zip(field.into_components()),
    )?;
    Ok((form, time))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{exterior_derivative, form_from_velocity};
    use crate::fields::{Grid, TrigField};

    #[test]
    fn form_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("omega.rsff");
        let g = Grid::cube(3, 8).unwrap();
        let u: Vec<_> = TrigField::trig_random(4, 2, 3, 3, 3)
            .components()
            .iter()
            .map(|c| c.sample(&g).unwrap())
            .collect();
        let w = exterior_derivative(&form_from_velocity(&u).unwrap());
        write_form(&path, &w, 0.5).unwrap();
        let text = std::fs::read_to_string(dir.path().join("omega.json")).unwrap();
        assert!(text.contains("\"degree\": 2"));
        let (back, t) = read_form(&path).unwrap();
        assert_eq!(t, 0.5);
        assert_eq!(back, w);

        let empty = KForm::<ScalarField>::zero(&g, 2);
        write_form(&path, &empty, 0.0).unwrap();
        assert_eq!(read_form(&path).unwrap().0, empty);
    }
}
