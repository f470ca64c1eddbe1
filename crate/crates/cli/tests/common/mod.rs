//! Minimal reader for the legacy ASCII VTK files written by `export-field`.

#![allow(dead_code)]

use std::collections::BTreeMap;

pub struct Vtk {
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u32>,
    pub cell_data: BTreeMap<String, Vec<f64>>,
}

impl Vtk {
    pub fn centroid(&self, c: usize) -> [f64; 2] {
        let v = &self.cells[c];
        let k = v.len() as f64;
        [
            v.iter().map(|&i| self.points[i][0]).sum::<f64>() / k,
            v.iter().map(|&i| self.points[i][1]).sum::<f64>() / k,
        ]
    }
}

pub fn parse_vtk(text: &str) -> Vtk {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# vtk DataFile Version"));
    lines.next().unwrap();
    assert_eq!(lines.next().unwrap().trim(), "ASCII");
    assert_eq!(lines.next().unwrap().trim(), "DATASET UNSTRUCTURED_GRID");
    let mut tokens = lines.flat_map(str::split_whitespace).peekable();
    let mut vtk = Vtk {
        points: Vec::new(),
        cells: Vec::new(),
        cell_types: Vec::new(),
        cell_data: BTreeMap::new(),
    };
    let mut ncells = 0;
    while let Some(key) = tokens.next() {
        let mut next = || tokens.next().expect("unexpected end of file");
        match key {
            "POINTS" => {
                let n: usize = next().parse().unwrap();
                next();
                for _ in 0..n {
                    vtk.points.push([
                        next().parse().unwrap(),
                        next().parse().unwrap(),
                        next().parse().unwrap(),
                    ]);
                }
            }
            "CELLS" => {
                ncells = next().parse().unwrap();
                let size: usize = next().parse().unwrap();
                let mut read = 0;
                for _ in 0..ncells {
                    let k: usize = next().parse().unwrap();
                    vtk.cells.push((0..k).map(|_| next().parse().unwrap()).collect());
                    read += k + 1;
                }
                assert_eq!(read, size);
            }
            "CELL_TYPES" => {
                let n: usize = next().parse().unwrap();
                vtk.cell_types = (0..n).map(|_| next().parse().unwrap()).collect();
            }
            "CELL_DATA" => {
                assert_eq!(next().parse::<usize>().unwrap(), ncells);
            }
            "SCALARS" => {
                let name = next().to_string();
                assert_eq!(next(), "double");
                assert_eq!(next(), "1");
                assert_eq!(next(), "LOOKUP_TABLE");
                next();
                let vals = (0..ncells).map(|_| next().parse().unwrap()).collect();
                vtk.cell_data.insert(name, vals);
            }
            other => panic!("unexpected VTK keyword {other}"),
        }
    }
    vtk
}
