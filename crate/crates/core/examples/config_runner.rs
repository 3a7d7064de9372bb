//! A minimization described by a key=value experiment file, run through the
//! config runner; the written field is read back and exported as CSV.

use gl_lab::io::{read_field, write_csv};
use gl_lab::lab::run_config;
use gl_lab::minimize::branch_label;
use std::fs;

fn main() -> gl_lab::Result<()> {
    let dir = std::env::temp_dir().join(format!("gl-lab-example-{}", std::process::id()));
    fs::create_dir_all(&dir)?;
    let config = dir.join("vortex.cfg");
    let text = format!(
        "# solitonic vortex on a strip of half-width 3\n\
         task = minimize\n\
         d = 3\n\
         L = 20\n\
         nx = 321\n\
         ny = 49\n\
         space = odd\n\
         out = {}\n\
         report = {}\n",
        dir.join("u_d.glf").display(),
        dir.join("u_d.json").display()
    );
    fs::write(&config, &text)?;
    println!("config:\n{text}");
    let m = run_config(&config)?;
    println!("manifest: task {}, workers {}, seeds {:?}, {:.2} s", m.task, m.workers, m.seeds, m.wall_time_s);
    for o in &m.outputs {
        println!("  wrote {}", o.display());
    }
    let u = read_field(dir.join("u_d.glf"))?;
    println!("read back {} nodes on {:?}, branch {:?}", u.values().len(), u.grid(), branch_label(&u));
    write_csv(&u, dir.join("u_d.csv"))?;
    println!("CSV written to {}", dir.join("u_d.csv").display());

    fs::write(&config, text.replace("d = 3", "dd = 3"))?;
    match run_config(&config) {
        Err(e) => println!("\na misspelled key is rejected: {e}"),
        Ok(_) => println!("\nunexpected: misspelled key accepted"),
    }
    fs::remove_dir_all(&dir)?;
    Ok(())
}
