use odaframe_core::{SensorReading, Topic};
use odaframe_transport::frame::{decode_prefix, frame_len};
use odaframe_transport::{read_frame, Frame};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn topic_strategy() -> impl Strategy<Value = Topic> {
    prop::collection::vec("[a-zA-Z0-9_.-]{1,12}|[\\u{80}-\\u{10ffff}&&[^\\p{Cc}]]{1,4}", 1..6)
        .prop_map(|segs| Topic::new(format!("/{}", segs.join("/"))).unwrap())
}

fn readings_strategy() -> impl Strategy<Value = Vec<SensorReading>> {
    prop::collection::vec((any::<i64>(), any::<u64>()).prop_map(|(v, t)| SensorReading::new(v, t)), 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn round_trip_and_length(topic in topic_strategy(), readings in readings_strategy()) {
        let frame = Frame::new(topic.clone(), readings.clone());
        let bytes = frame.encode().unwrap();
        prop_assert_eq!(bytes.len(), frame_len(topic.as_str().len(), readings.len()));
        prop_assert_eq!(Frame::decode(&bytes).unwrap(), frame);
    }
}

/// Random mutations of valid frames plus random garbage; decoding must return
/// (never panic) and agree between the slice and stream decoders.
#[test]
fn mutated_frames_never_crash_the_decoder() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf00d);
    let mut accepted = 0;
    for case in 0..200_000u32 {
        let bytes: Vec<u8> = if case % 4 == 0 {
            let n = rng.random_range(0..64);
            (0..n).map(|_| rng.random()).collect()
        } else {
            let topic = Topic::new(format!("/n{}/s{}", rng.random_range(0..100), rng.random_range(0..10))).unwrap();
            let count = rng.random_range(1..5);
            let readings: Vec<SensorReading> =
                (0..count).map(|_| SensorReading::new(rng.random(), rng.random())).collect();
            let mut b = Frame::new(topic, readings).encode().unwrap();
            match rng.random_range(0..4) {
                0 => {
                    let i = rng.random_range(0..b.len());
                    b[i] ^= 1 << rng.random_range(0..8);
                }
                1 => b.truncate(rng.random_range(0..b.len())),
                2 => {
                    let i = rng.random_range(0..b.len());
                    b.insert(i, rng.random());
                }
                _ => {
                    for _ in 0..rng.random_range(1..6) {
                        let i = rng.random_range(0..b.len());
                        b[i] = rng.random();
                    }
                }
            }
            b
        };
        let sliced = Frame::decode(&bytes);
        let streamed = read_frame(&mut std::io::Cursor::new(&bytes));
        if let Ok(f) = &sliced {
            accepted += 1;
            assert_eq!(f.encode().unwrap(), bytes);
            assert!(matches!(&streamed, Ok(Some(g)) if g == f));
        }
        if let Err(e) = &sliced {
            assert!(e.offset <= bytes.len(), "offset {} beyond input {}", e.offset, bytes.len());
        }
        let _ = decode_prefix(&bytes);
    }
    // Value bit flips keep frames valid, so some mutants must decode.
    assert!(accepted > 1000, "{accepted}");
}
