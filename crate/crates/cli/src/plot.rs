/// Gnuplot script for the files written by `simulate`.
pub fn simulation_script(title: &str, n: usize) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot script; run from this directory with `gnuplot plot.gp`\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 900,900\n");
    s.push_str("set output 'simulation.png'\n");
    s.push_str("set multiplot layout 2,1\n");
    s.push_str(&format!("set title '{title}: intra-cluster sync error'\n"));
    s.push_str("set xlabel 't'\nset ylabel 'error [rad]'\nset logscale y\n");
    s.push_str("plot 'err.csv' using 1:2 with lines title 'max', \\\n");
    s.push_str("     'err.csv' using 1:3 with lines title 'norm of x'\n");
    s.push_str("unset logscale y\n");
    s.push_str(&format!("set title '{title}: phases'\n"));
    s.push_str("set ylabel 'theta mod 2π'\n");
    s.push_str(&format!(
        "plot for [i=2:{}] 'trajectory.csv' using 1:i with lines notitle\n",
        n + 1
    ));
    s.push_str("unset multiplot\n");
    s
}
