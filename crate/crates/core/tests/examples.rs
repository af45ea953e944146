trait Outcome {
    fn check(self);
}

impl Outcome for () {
    fn check(self) {}
}

impl<E: std::fmt::Debug> Outcome for Result<(), E> {
    fn check(self) {
        self.unwrap();
    }
}

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!("../examples/", stringify!($name), ".rs"));

            #[test]
            fn runs() {
                crate::Outcome::check(main());
            }
        }
    };
}

example!(branch_distance);
example!(exact_ged);
example!(likelihood_model);
example!(synthetic_corpus);
example!(priors);
example!(similarity_search);
example!(variants);
example!(assignment_baselines);
example!(benchmark);
example!(omega_monte_carlo);
