use std::path::{Path, PathBuf};

use super::report::write_text;
use super::HarnessError;

const CURVES: &str = r#"set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 1000,700
set output 'curves.png'
set multiplot layout 2,1
set title 'Reward (moving average over runs)'
set xlabel 'episode'
plot 'curves.csv' using 1:2:4 with filledcurves fs transparent solid 0.25 title 'min/max', \
     '' using 1:3 with lines lw 2 title 'mean'
set title 'Satisfaction rate'
set yrange [0:1.05]
plot 'curves.csv' using 1:5:7 with filledcurves fs transparent solid 0.25 title 'min/max', \
     '' using 1:6 with lines lw 2 title 'mean', \
     '' using 1:8 with lines dt 2 title 'GO fraction'
unset multiplot
"#;

const TIMING: &str = r#"set datafile separator ','
set terminal pngcairo size 800,500
set output 'timing.png'
set logscale y
set xlabel '(p,k) pairs'
set ylabel 'seconds'
plot 'timing.csv' using 5:6 every ::1 with linespoints title 'closed form', \
     '' using 5:7 every ::1 with linespoints title 'recursive'
"#;

/// Writes gnuplot scripts next to the CSV files they plot.
pub fn write_scripts(out: &Path, curves: bool, timing: bool) -> Result<Vec<PathBuf>, HarnessError> {
    let mut written = Vec::new();
    if curves {
        let p = out.join("curves.gp");
        write_text(&p, CURVES)?;
        written.push(p);
    }
    if timing {
        let p = out.join("timing.gp");
        write_text(&p, TIMING)?;
        written.push(p);
    }
    Ok(written)
}
