use btdm_core::codec::{build_symbol, chordal_distance, demap_symbol, CodecParams};
use btdm_core::receiver::{pupe, uniqueness_bound, MessageSet};
use btdm_core::tensor::{synthesize_received, BlockTerm, BtdModel, ComplexTensor3};
use btdm_core::{BchCode, Bits, CMatrix, Complex64};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(complex(), rows * cols).prop_map(move |v| CMatrix::from_vec(rows, cols, v))
}

fn tensor(dims: (usize, usize, usize)) -> impl Strategy<Value = ComplexTensor3> {
    prop::collection::vec(complex(), dims.0 * dims.1 * dims.2)
        .prop_map(move |v| ComplexTensor3::from_vec(dims, v).unwrap())
}

fn bits(len: usize) -> impl Strategy<Value = Bits> {
    prop::collection::vec(any::<bool>(), len).prop_map(Bits::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unfold_fold_roundtrip(t in tensor((3, 4, 2)), mode in 1usize..=3) {
        let m = t.unfold(mode).unwrap();
        prop_assert_eq!(ComplexTensor3::fold(&m, mode, (3, 4, 2)).unwrap(), t);
    }

    #[test]
    fn synthesis_is_linear_in_channel(
        a in matrix(4, 2), b in matrix(3, 2),
        h1 in prop::collection::vec(complex(), 2), h2 in prop::collection::vec(complex(), 2),
        c in complex(),
    ) {
        prop_assume!(BlockTerm::new(a.clone(), b.clone(), h1.clone()).is_ok());
        let mixed: Vec<Complex64> = h1.iter().zip(&h2).map(|(x, y)| x + c * y).collect();
        let one = |h: Vec<Complex64>| {
            synthesize_received(&BtdModel::new(vec![BlockTerm::new(a.clone(), b.clone(), h).unwrap()]).unwrap(), None).unwrap()
        };
        let lhs = one(mixed);
        let mut rhs = one(h1);
        rhs.axpy(c, &one(h2)).unwrap();
        prop_assert!((&lhs - &rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn bch_is_linear(x in bits(51), y in bits(51)) {
        let code = BchCode::with_lengths(7, 2, 65, 51).unwrap();
        let sum = code.encode(&x.xor(&y)).unwrap();
        prop_assert_eq!(sum, code.encode(&x).unwrap().xor(&code.encode(&y).unwrap()));
    }

    #[test]
    fn bch_corrects_up_to_t(x in bits(51), e1 in 0usize..65, e2 in 0usize..65) {
        let code = BchCode::with_lengths(7, 2, 65, 51).unwrap();
        let mut word = code.encode(&x).unwrap();
        word.flip(e1);
        if e2 != e1 {
            word.flip(e2);
        }
        let (decoded, status) = code.decode(&word).unwrap();
        prop_assert!(status.is_valid());
        prop_assert_eq!(decoded, x);
    }

    #[test]
    fn codec_roundtrip_under_mixing(payload in bits(37), mix in matrix(2, 2), scale in 0.1..10.0f64) {
        let params = CodecParams::new(10, 2, 37, 2.0).unwrap();
        let symbol = build_symbol(&payload, &params).unwrap();
        prop_assume!(mix.clone().try_inverse().is_some_and(|inv| inv.norm() * mix.norm() < 1e3));
        let seen = symbol.matrix() * &mix * Complex64::new(scale, 0.0);
        prop_assert_eq!(demap_symbol(&seen, &params).unwrap().bits, payload);
    }

    #[test]
    fn chordal_distance_is_symmetric(a in bits(28), b in bits(28)) {
        let params = CodecParams::new(8, 2, 28, 2.0).unwrap();
        let sa = build_symbol(&a, &params).unwrap();
        let sb = build_symbol(&b, &params).unwrap();
        let d1 = chordal_distance(sa.matrix(), sb.matrix()).unwrap();
        let d2 = chordal_distance(sb.matrix(), sa.matrix()).unwrap();
        prop_assert!((d1 - d2).abs() < 1e-12);
        prop_assert!((0.0..=2f64.sqrt() + 1e-12).contains(&d1));
        prop_assert_eq!(d1 < 1e-7, a == b);
    }

    #[test]
    fn pupe_in_unit_interval(sent in prop::collection::btree_set(0u64..64, 1..10), got in prop::collection::btree_set(0u64..64, 0..10)) {
        let s: MessageSet = sent.iter().map(|&v| Bits::from_uint(v, 6)).collect();
        let d: MessageSet = got.iter().map(|&v| Bits::from_uint(v, 6)).collect();
        let p = pupe(&s, &d).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert_eq!(p == 0.0, s.is_subset(&d));
    }

    #[test]
    fn bound_monotone(t1 in 1usize..40, t2 in 1usize..40, l in 1usize..4, n in 1usize..40) {
        let k = uniqueness_bound(t1, t2, l, n);
        prop_assert!(uniqueness_bound(t1 + 1, t2, l, n) >= k);
        prop_assert!(uniqueness_bound(t1, t2 + 1, l, n) >= k);
        prop_assert!(uniqueness_bound(t1, t2, l, n + 1) >= k);
        prop_assert!(uniqueness_bound(t1, t2, l + 1, n) <= k);
    }
}
