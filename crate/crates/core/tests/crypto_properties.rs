use minishare_core::field::FieldModulus;
use minishare_core::shamir::{PublicPoint, Share};
use minishare_core::sscrypto::{
    derive_pairwise_key, open_share, seal_share, CryptoError, MasterSecret, SealedShare,
    ShareNonce, SEALED_LEN,
};
use minishare_core::NodeId;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_case(rng: &mut ChaCha8Rng) -> (MasterSecret, NodeId, NodeId, Share, ShareNonce) {
    let q = FieldModulus::default();
    let mut master = [0u8; 16];
    rng.fill_bytes(&mut master);
    let a = NodeId(1 + rng.next_u32() % 64);
    let b = loop {
        let b = NodeId(1 + rng.next_u32() % 64);
        if b != a {
            break b;
        }
    };
    let share = Share {
        point: PublicPoint::for_node(b, q).unwrap(),
        value: q.random_element(rng),
    };
    let nonce = ShareNonce {
        round: rng.next_u64(),
        sub_slot: rng.next_u32() % 4096,
    };
    (MasterSecret(master), a, b, share, nonce)
}

#[test]
fn seal_open_round_trip() {
    let q = FieldModulus::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let (master, a, b, share, nonce) = random_case(&mut rng);
        let key = derive_pairwise_key(&master, a, b).unwrap();
        let sealed = seal_share(&key, a, b, &share, nonce);
        let wire = SealedShare::from_bytes(&sealed.to_bytes()).unwrap();
        assert_eq!(open_share(&key, &wire, q), Ok(share));
    }
}

#[test]
fn single_bit_flips_are_detected() {
    let q = FieldModulus::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let (master, a, b, share, nonce) = random_case(&mut rng);
        let key = derive_pairwise_key(&master, a, b).unwrap();
        let mut bytes = seal_share(&key, a, b, &share, nonce).to_bytes();
        let bit = rng.next_u32() as usize % (SEALED_LEN * 8);
        bytes[bit / 8] ^= 1 << (bit % 8);
        let sealed = SealedShare::from_bytes(&bytes).unwrap();
        // A flipped sender/destination id selects another pair's key.
        let key = derive_pairwise_key(&master, sealed.sender, sealed.destination).unwrap_or(key);
        assert_eq!(
            open_share(&key, &sealed, q),
            Err(CryptoError::Authentication)
        );
    }
}
