use btdm_core::{BchCode, Bits, DecodeStatus};

fn vectors(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split_whitespace();
            (it.next().unwrap().to_string(), it.next().unwrap().to_string())
        })
        .collect()
}

fn check(code: &BchCode, text: &str) {
    let rows = vectors(text);
    assert_eq!(rows.len(), 10);
    for (payload_hex, codeword_hex) in rows {
        let payload = Bits::from_hex(&payload_hex, code.k_eff()).unwrap();
        let codeword = code.encode(&payload).unwrap();
        assert_eq!(codeword.to_hex(), codeword_hex, "payload {payload_hex}");
        let (decoded, status) = code.decode(&codeword).unwrap();
        assert_eq!(decoded, payload);
        assert_eq!(status, DecodeStatus::Ok);
    }
}

#[test]
fn desk_code_vectors() {
    let code = BchCode::with_lengths(7, 2, 65, 51).unwrap();
    check(&code, include_str!("data/bch_desk.txt"));
}

#[test]
fn full_scale_code_vectors() {
    let code = BchCode::with_lengths(8, 2, 220, 204).unwrap();
    check(&code, include_str!("data/bch_full.txt"));
}
