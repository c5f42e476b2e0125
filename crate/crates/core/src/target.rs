//! The slice of a debug session the auditor needs, so evaluation can be
//! exercised against stand-ins as well as a live VM.

use mdwp::{
    ClassMirror, LinkError, MethodMirror, ObjectMirror, SeqMirror, Session, ValueMirror, WireValue,
};

pub trait Target {
    fn list_classes(&mut self) -> Result<Vec<String>, LinkError>;
    fn class(&mut self, name: &str) -> Result<ClassMirror, LinkError>;
    fn get_field(&mut self, obj: &ObjectMirror, field: &str) -> Result<ValueMirror, LinkError>;
    fn seq_snapshot(&mut self, seq: &SeqMirror) -> Result<Vec<ValueMirror>, LinkError>;
    fn invoke_pure(
        &mut self,
        obj: &ObjectMirror,
        method: &MethodMirror,
        args: &[ValueMirror],
    ) -> Result<ValueMirror, LinkError>;
    fn heap_digest(&mut self) -> Result<String, LinkError>;
    fn mirror(&self, v: WireValue) -> ValueMirror;
}

impl Target for Session {
    fn list_classes(&mut self) -> Result<Vec<String>, LinkError> {
        Session::list_classes(self)
    }

    fn class(&mut self, name: &str) -> Result<ClassMirror, LinkError> {
        Session::class(self, name).cloned()
    }

    fn get_field(&mut self, obj: &ObjectMirror, field: &str) -> Result<ValueMirror, LinkError> {
        Session::get_field(self, obj, field)
    }

    fn seq_snapshot(&mut self, seq: &SeqMirror) -> Result<Vec<ValueMirror>, LinkError> {
        Session::seq_snapshot(self, seq)
    }

    fn invoke_pure(
        &mut self,
        obj: &ObjectMirror,
        method: &MethodMirror,
        args: &[ValueMirror],
    ) -> Result<ValueMirror, LinkError> {
        Session::invoke_pure(self, obj, method, args)
    }

    fn heap_digest(&mut self) -> Result<String, LinkError> {
        Session::heap_digest(self)
    }

    fn mirror(&self, v: WireValue) -> ValueMirror {
        Session::mirror(self, v)
    }
}
