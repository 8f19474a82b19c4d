//! Direct model-theoretic evaluation over a finite domain.

use super::domain::{Domain, GroundAtom};
use super::formula::{Formula, Term, IN_ROOM};

/// Truth value of a closed formula under `interp`, with quantifiers ranging
/// over the room.
pub fn evaluate(formula: &Formula, domain: &Domain, interp: &dyn Fn(&GroundAtom) -> bool) -> bool {
    let mut env = Vec::new();
    eval(formula, domain, interp, &mut env)
}

fn eval<'d>(
    f: &Formula,
    domain: &'d Domain,
    interp: &dyn Fn(&GroundAtom) -> bool,
    env: &mut Vec<&'d str>,
) -> bool {
    match f {
        Formula::Atom(a) => {
            let args: Vec<String> = a
                .args
                .iter()
                .map(|t| match t {
                    Term::Const(c) => c.clone(),
                    Term::Var(v) => env[*v as usize].to_string(),
                })
                .collect();
            if a.pred == IN_ROOM {
                return domain.is_in_room(&args[0]);
            }
            interp(&GroundAtom::new(a.pred.clone(), args))
        }
        Formula::Not(g) => !eval(g, domain, interp, env),
        Formula::And(gs) => gs.iter().all(|g| eval(g, domain, interp, env)),
        Formula::Or(gs) => gs.iter().any(|g| eval(g, domain, interp, env)),
        Formula::Implies(a, b) => !eval(a, domain, interp, env) || eval(b, domain, interp, env),
        Formula::Iff(a, b) => eval(a, domain, interp, env) == eval(b, domain, interp, env),
        Formula::ForallInRoom(g) => domain.room().iter().all(|c| with(env, c, |env| eval(g, domain, interp, env))),
        Formula::ExistsInRoom(g) => domain.room().iter().any(|c| with(env, c, |env| eval(g, domain, interp, env))),
        Formula::AtLeastK(k, g) => {
            let count = domain
                .room()
                .iter()
                .filter(|c| with(env, c, |env| eval(g, domain, interp, env)))
                .count();
            count >= *k as usize
        }
    }
}

fn with<'d>(env: &mut Vec<&'d str>, name: &'d str, f: impl FnOnce(&mut Vec<&'d str>) -> bool) -> bool {
    env.push(name);
    let r = f(env);
    env.pop();
    r
}
