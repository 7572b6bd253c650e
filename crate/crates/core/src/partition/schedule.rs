use serde::Serialize;

use crate::error::{Error, Result};

/// Level grouping `f(k) = min{ i > k : a_{k+1} + ... + a_i >= w }` for
/// nonincreasing level sizes `a_0 >= a_1 >= ...` with `w = a_0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FSchedule {
    pub sizes: Vec<u64>,
    pub width: u64,
    /// `f(k)` for `k = 0..=m`, `None` standing for infinity.
    pub f: Vec<Option<usize>>,
    /// `f_0(0) = 0, f_1(0), ..., f_d(0)`: the finite iterates.
    pub iterates: Vec<usize>,
    pub depth: usize,
}

pub fn f_schedule(sizes: &[u64]) -> Result<FSchedule> {
    let Some(&width) = sizes.first() else {
        return Err(Error::input("f-schedule needs at least one level"));
    };
    if let Some(i) = (1..sizes.len()).find(|&i| sizes[i] > sizes[i - 1]) {
        return Err(Error::input(format!(
            "level sizes must be nonincreasing; a_{i} = {} > a_{} = {}",
            sizes[i],
            i - 1,
            sizes[i - 1]
        )));
    }
    let f: Vec<Option<usize>> = (0..sizes.len())
        .map(|k| {
            let mut acc = 0u64;
            for (i, &a) in sizes.iter().enumerate().skip(k + 1) {
                acc += a;
                if acc >= width {
                    return Some(i);
                }
            }
            None
        })
        .collect();
    let mut iterates = vec![0usize];
    while let Some(next) = f[*iterates.last().expect("nonempty")] {
        iterates.push(next);
    }
    let depth = iterates.len() - 1;
    Ok(FSchedule { sizes: sizes.to_vec(), width, f, iterates, depth })
}
