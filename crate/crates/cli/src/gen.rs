use std::fs::File;
use std::io::{self, BufWriter, Write};

use hopdb::graph::{generate_glp, generate_named, write_edge_list, GlpParams, NamedShape};

use crate::args::{GenArgs, Shape};
use crate::fail::Fail;

pub fn cmd_gen(a: &GenArgs) -> Result<(), Fail> {
    let g = match a.shape {
        Shape::Glp => {
            if !(a.density.is_finite() && a.density > 0.0) {
                return Err(Fail::Validation(format!("density must be positive, got {}", a.density)));
            }
            generate_glp(a.vertices, &GlpParams::with_density(a.density), a.seed)?
        }
        Shape::Star => generate_named(NamedShape::Star, a.vertices),
        Shape::Path => generate_named(NamedShape::Path, a.vertices),
        Shape::Cycle => generate_named(NamedShape::Cycle, a.vertices),
        Shape::Clique => generate_named(NamedShape::Clique, a.vertices),
    };
    match &a.output {
        Some(path) => {
            let ctx = |e: io::Error| Fail::from(e).context(path.display());
            let mut w = BufWriter::new(File::create(path).map_err(ctx)?);
            write_edge_list(&g, &mut w, None).and_then(|_| w.flush()).map_err(ctx)
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            write_edge_list(&g, &mut w, None).and_then(|_| w.flush()).map_err(Fail::from)
        }
    }
}
