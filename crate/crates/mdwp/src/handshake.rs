//! Connection handshake: the connecting side sends the 8-byte magic, the
//! accepting side echoes it back.

use std::io::{Read, Write};

use crate::error::LinkError;

pub const MAGIC: &[u8; 8] = b"MDWP-001";

/// Run by the side that initiated the TCP connection.
pub fn connector_handshake(stream: &mut (impl Read + Write)) -> Result<(), LinkError> {
    stream.write_all(MAGIC)?;
    stream.flush()?;
    let reply = read_magic(stream)?;
    check(&reply)
}

/// Run by the side that accepted the TCP connection.
pub fn acceptor_handshake(stream: &mut (impl Read + Write)) -> Result<(), LinkError> {
    let got = read_magic(stream)?;
    check(&got)?;
    stream.write_all(MAGIC)?;
    stream.flush()?;
    Ok(())
}

fn read_magic(stream: &mut impl Read) -> Result<[u8; 8], LinkError> {
    let mut buf = [0u8; 8];
    stream
        .read_exact(&mut buf)
        .map_err(|e| LinkError::Handshake(format!("peer closed during handshake: {e}")))?;
    Ok(buf)
}

fn check(got: &[u8; 8]) -> Result<(), LinkError> {
    if got == MAGIC {
        Ok(())
    } else {
        Err(LinkError::Handshake(format!(
            "protocol version mismatch: expected {}, got {}",
            String::from_utf8_lossy(MAGIC),
            String::from_utf8_lossy(got)
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::net::{TcpListener, TcpStream};
    use std::thread;

    #[test]
    fn both_sides_agree() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let t = thread::spawn(move || {
            let (mut s, _) = listener.accept().unwrap();
            acceptor_handshake(&mut s)
        });
        let mut c = TcpStream::connect(addr).unwrap();
        connector_handshake(&mut c).unwrap();
        t.join().unwrap().unwrap();
    }

    #[test]
    fn version_mismatch() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let t = thread::spawn(move || {
            let (mut s, _) = listener.accept().unwrap();
            let mut buf = [0u8; 8];
            s.read_exact(&mut buf).unwrap();
            s.write_all(b"MDWP-000").unwrap();
        });
        let mut c = TcpStream::connect(addr).unwrap();
        let err = connector_handshake(&mut c).unwrap_err();
        assert!(
            err.to_string().contains("protocol version mismatch"),
            "{err}"
        );
        t.join().unwrap();
    }
}
