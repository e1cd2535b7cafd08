use super::WaveTrajectory;
use crate::error::Result;
use std::io::Write;

/// `t,re_w_0,im_w_0,...,re_C_0,im_C_0,...` at the sample times.
pub fn write_trajectory_csv<W: Write>(traj: &WaveTrajectory, out: W) -> Result<()> {
    let n = traj.dim();
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    for i in 0..n {
        header.push(format!("re_w_{i}"));
        header.push(format!("im_w_{i}"));
    }
    for i in 0..n {
        header.push(format!("re_C_{i}"));
        header.push(format!("im_C_{i}"));
    }
    wtr.write_record(&header)?;
    let times = traj.times();
    for ((t, w), c) in times.iter().zip(traj.samples()).zip(traj.cumulative()) {
        let mut row = vec![t.to_string()];
        for z in w.iter().chain(&c) {
            row.push(z.re.to_string());
            row.push(z.im.to_string());
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// `t,norm_w,norm_C` at the sample times.
pub fn write_norms_csv<W: Write>(traj: &WaveTrajectory, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["t", "norm_w", "norm_C"])?;
    for ((t, nw), (_, nc)) in traj.norms().iter().zip(traj.cumulative_norms()) {
        wtr.write_record([t.to_string(), nw.to_string(), nc.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
